"""Manager-side library: discovery, agent directory, sessions, polling,
trap intake, and the operation log.

A :class:`Manager` owns the shared pieces (directory, log, the background
listener that tracks agent announce/farewell broadcasts, trap intake
sockets).  Each :class:`ManagerSession` talks to one agent over TCP or UDP
and serializes its own request/response exchanges; concurrent callers get
consistent behaviour because every exchange holds the session lock.
"""

from __future__ import annotations

import socket
import struct
import threading
import time
from dataclasses import dataclass
from typing import Callable, Optional, Union

from nmlite import security, wire
from nmlite.mib.tree import InvalidOid, parse_oid
from nmlite.wire import Message, MessageType, make_message

__all__ = [
    "ManagerError", "ConnectTimeout", "DeniedByAgent", "AgentError",
    "RequestTimeout", "StoppedSession",
    "DirectoryEntry", "AgentDirectory", "LogEntry", "OperationLog",
    "DescribeResult", "TrapEvent", "Manager", "ManagerSession", "PollTask",
    "InvalidOid",
]

DEFAULT_TCP_PORT = 7770
DEFAULT_UDP_PORT = 7771
DEFAULT_DISCOVERY_PORT = 7772
UDP_RETRIES = 3
UDP_RETRY_INTERVAL_S = 1.0
CONNECT_TIMEOUT_S = 5.0


class ManagerError(Exception):
    pass


class ConnectTimeout(ManagerError):
    pass


class RequestTimeout(ManagerError):
    pass


class StoppedSession(ManagerError):
    pass


class AgentError(ManagerError):
    """The agent answered with an error response."""

    def __init__(self, reason: str, detail: str = ""):
        self.reason = reason
        self.detail = detail
        super().__init__(f"{reason}: {detail}" if detail else reason)


class DeniedByAgent(AgentError):
    pass


# -- directory ----------------------------------------------------------------

@dataclass
class DirectoryEntry:
    host: str
    tcp_port: int
    udp_port: int
    first_seen: float
    last_seen: float

    @property
    def key(self) -> tuple[str, int]:
        return (self.host, self.tcp_port)

    def label(self) -> str:
        return f"{self.host}:{self.tcp_port}"


class AgentDirectory:
    """The browser's agent list: unique by (host, tcp_port), fed by
    discovery replies and announce/farewell broadcasts."""

    def __init__(self) -> None:
        self._entries: dict[tuple[str, int], DirectoryEntry] = {}
        self._lock = threading.Lock()
        self.mutation_log: list[tuple[float, str, tuple[str, int]]] = []
        self._observers: list[Callable[[str, DirectoryEntry], None]] = []

    def observe(self, callback: Callable[[str, DirectoryEntry], None]) -> None:
        self._observers.append(callback)

    def _notify(self, action: str, entry: DirectoryEntry) -> None:
        for callback in list(self._observers):
            try:
                callback(action, entry)
            except Exception:
                pass

    def upsert(self, host: str, tcp_port: int, udp_port: int) -> DirectoryEntry:
        now = time.time()
        with self._lock:
            entry = self._entries.get((host, tcp_port))
            if entry is None:
                entry = DirectoryEntry(host, tcp_port, udp_port, now, now)
                self._entries[entry.key] = entry
                self.mutation_log.append((now, "add", entry.key))
                added = True
            else:
                entry.last_seen = now
                entry.udp_port = udp_port
                added = False
        if added:
            self._notify("add", entry)
        return entry

    def remove(self, host: str, tcp_port: int) -> Optional[DirectoryEntry]:
        with self._lock:
            entry = self._entries.pop((host, tcp_port), None)
            if entry is not None:
                self.mutation_log.append((time.time(), "remove", entry.key))
        if entry is not None:
            self._notify("remove", entry)
        return entry

    def snapshot(self) -> list[DirectoryEntry]:
        with self._lock:
            return sorted(self._entries.values(),
                          key=lambda e: (e.host, e.tcp_port))

    def __len__(self) -> int:
        with self._lock:
            return len(self._entries)


# -- logging -------------------------------------------------------------------

@dataclass
class LogEntry:
    timestamp: float
    agent: str
    request_type: str
    oid: str
    outcome: str
    rtt_us: int

    def format_line(self) -> str:
        iso = time.strftime("%Y-%m-%dT%H:%M:%S",
                            time.localtime(self.timestamp))
        iso += f".{int(self.timestamp % 1 * 1e6):06d}"
        return "\t".join([iso, self.agent, self.request_type, self.oid,
                          self.outcome, str(self.rtt_us)])


class OperationLog:
    """Append-only operation log, optionally mirrored to a TSV file."""

    def __init__(self, path: Optional[str] = None):
        self.path = path
        self.entries: list[LogEntry] = []
        self._lock = threading.Lock()

    def append(self, entry: LogEntry) -> None:
        with self._lock:
            self.entries.append(entry)
            if self.path:
                try:
                    with open(self.path, "a") as fh:
                        fh.write(entry.format_line() + "\n")
                except OSError:
                    pass

    def tail(self, count: int) -> list[LogEntry]:
        with self._lock:
            return list(self.entries[-count:])

    def __len__(self) -> int:
        with self._lock:
            return len(self.entries)


# -- results -------------------------------------------------------------------

@dataclass
class DescribeResult:
    name: str
    syntax: str
    access: str
    status: str
    description: str


@dataclass
class TrapEvent:
    instance: str
    value: str
    threshold: str
    timestamp_ms: int
    source: tuple[str, int]


# -- sessions ------------------------------------------------------------------

class ManagerSession:
    """One conversation with one agent over TCP or UDP.

    The security toggle may be flipped between requests; it changes the
    wire bytes (signature, encrypted values) but not decoded results.
    """

    def __init__(self, manager: "Manager", host: str, tcp_port: int,
                 udp_port: int, transport: str = "tcp",
                 community: Optional[str] = None,
                 security_enabled: bool = False,
                 connect_timeout: float = CONNECT_TIMEOUT_S):
        if transport not in ("tcp", "udp"):
            raise ValueError(f"unknown transport {transport!r}")
        self.manager = manager
        self.host = host
        self.tcp_port = tcp_port
        self.udp_port = udp_port
        self.transport = transport
        self.community = community if community is not None else manager.community
        self.security_enabled = security_enabled
        self.closed = False
        self._corr = 0
        self._lock = threading.Lock()
        self._sock: Optional[socket.socket] = None
        self._stream = None
        self.root_level: list[tuple[str, int]] = []

        if transport == "tcp":
            try:
                self._sock = socket.create_connection((host, tcp_port),
                                                      timeout=connect_timeout)
            except OSError as exc:
                raise ConnectTimeout(f"{host}:{tcp_port}: {exc}") from exc
            self._sock.settimeout(connect_timeout)
            self._stream = self._sock.makefile("rb")
        else:
            self._sock = socket.socket(socket.AF_INET, socket.SOCK_DGRAM)
            self._sock.bind(("", 0))
            self._sock.settimeout(UDP_RETRY_INTERVAL_S)

        reply = self._exchange(MessageType.INITIALISE, [])
        self.root_level = wire.parse_level(reply.fields[0])

    @property
    def label(self) -> str:
        return f"{self.host}:{self.tcp_port}"

    def _next_corr(self) -> int:
        self._corr += 1
        return self._corr

    # -- the transaction core -------------------------------------------

    def _exchange(self, mtype: MessageType, fields: list,
                  oid_for_log: str = "") -> Message:
        if self.closed:
            raise StoppedSession(self.label)
        with self._lock:
            corr = self._next_corr()
            message = make_message(mtype, [self.community, *fields],
                                   correlation_id=corr)
            if self.security_enabled:
                key = self.manager.key
                if key is None or not key.has_private:
                    raise ManagerError("security enabled but no private key")
                message = security.sign_message(message, key)
            payload = wire.encode_message(message)
            started = time.perf_counter()
            try:
                reply = (self._exchange_tcp(payload, corr)
                         if self.transport == "tcp"
                         else self._exchange_udp(payload, corr))
            except RequestTimeout:
                self._log(mtype, oid_for_log, "timeout", started)
                raise
            rtt_us = int((time.perf_counter() - started) * 1e6)

        if reply.encrypted and len(reply.fields) > 1:
            key = self.manager.key
            if key is None or not key.has_private:
                raise ManagerError("agent encrypted the value but no private "
                                   "key is configured")
            reply.fields[1] = security.decrypt(reply.fields[1], key)
            reply.flags &= ~wire.FLAG_ENCRYPTED
        if reply.type == MessageType.ERROR_RESPONSE:
            reason = reply.field_str(0, default="")
            detail = reply.field_str(1, default="")
            self._log(mtype, oid_for_log, reason or "error", started, rtt_us)
            if reason == wire.ERR_DENIED:
                raise DeniedByAgent(reason, detail)
            raise AgentError(reason, detail)
        self._log(mtype, oid_for_log, "ok", started, rtt_us)
        return reply

    def _log(self, mtype: MessageType, oid: str, outcome: str,
             started: float, rtt_us: Optional[int] = None) -> None:
        if rtt_us is None:
            rtt_us = int((time.perf_counter() - started) * 1e6)
        self.manager.log.append(LogEntry(
            timestamp=time.time(), agent=self.label,
            request_type=mtype.name, oid=oid, outcome=outcome,
            rtt_us=rtt_us))

    def _exchange_tcp(self, payload: bytes, corr: int) -> Message:
        assert self._sock is not None and self._stream is not None
        try:
            self._sock.sendall(struct.pack(">I", len(payload)) + payload)
            while True:
                frame = wire.read_frame(self._stream)
                reply = wire.decode_message(frame)
                if reply.correlation_id == corr or reply.correlation_id == 0:
                    return reply
        except (wire.PeerClosed, wire.Truncated, socket.timeout, OSError) as exc:
            raise RequestTimeout(f"{self.label}: {exc}") from exc

    def _exchange_udp(self, payload: bytes, corr: int) -> Message:
        assert self._sock is not None
        peer = (self.host, self.udp_port)
        for _attempt in range(1 + UDP_RETRIES):
            try:
                self._sock.sendto(payload, peer)
            except OSError as exc:
                raise RequestTimeout(f"{self.label}: {exc}") from exc
            deadline = time.monotonic() + UDP_RETRY_INTERVAL_S
            while True:
                remaining = deadline - time.monotonic()
                if remaining <= 0:
                    break
                self._sock.settimeout(remaining)
                try:
                    data, _addr = self._sock.recvfrom(wire.MAX_UDP_PAYLOAD)
                except socket.timeout:
                    break
                except OSError as exc:
                    raise RequestTimeout(f"{self.label}: {exc}") from exc
                try:
                    reply = wire.decode_message(data)
                except wire.DecodeError:
                    continue
                # duplicate replies to retransmissions carry an older corr
                if reply.correlation_id == corr or reply.correlation_id == 0:
                    return reply
        raise RequestTimeout(f"{self.label}: no reply after "
                             f"{1 + UDP_RETRIES} attempts")

    # -- request surface ---------------------------------------------------

    @staticmethod
    def _check_oid(oid: str) -> str:
        parse_oid(oid)  # InvalidOid before anything is transmitted
        return oid

    def get(self, oid: str) -> tuple[str, str]:
        reply = self._exchange(MessageType.GET, [self._check_oid(oid)], oid)
        return reply.field_str(0), reply.field_str(1)

    def get_next(self, oid: str) -> tuple[str, str]:
        reply = self._exchange(MessageType.GET_NEXT, [self._check_oid(oid)], oid)
        return reply.field_str(0), reply.field_str(1)

    def set(self, oid: str, value: str) -> tuple[str, str]:
        reply = self._exchange(MessageType.SET,
                               [self._check_oid(oid), value], oid)
        return reply.field_str(0), reply.field_str(1)

    def describe(self, oid: str) -> DescribeResult:
        reply = self._exchange(MessageType.DESCRIBE, [self._check_oid(oid)], oid)
        return DescribeResult(*(reply.field_str(i) for i in range(5)))

    def next_level(self, oid: str) -> list[tuple[str, int]]:
        reply = self._exchange(MessageType.NEXT_LEVEL,
                               [self._check_oid(oid)], oid)
        return wire.parse_level(reply.fields[0])

    def upper_level(self, oid: str) -> list[tuple[str, int]]:
        reply = self._exchange(MessageType.UPPER_LEVEL,
                               [self._check_oid(oid)], oid)
        return wire.parse_level(reply.fields[0])

    def walk(self, oid: str, limit: int = 10000) -> list[tuple[str, str]]:
        """Iterated get-next from ``oid`` until the end of the tree."""
        results: list[tuple[str, str]] = []
        current = self._check_oid(oid)
        for _ in range(limit):
            try:
                instance, value = self.get_next(current)
            except AgentError as exc:
                if exc.reason == wire.ERR_END_OF_MIB:
                    break
                raise
            results.append((instance, value))
            current = instance
        return results

    def subscribe_trap(self, oid: str, threshold: float, period_ms: int,
                       report_port: int, report_host: str = "") -> None:
        self._exchange(MessageType.SUBSCRIBE_TRAP,
                       [self._check_oid(oid), str(threshold), str(period_ms),
                        report_host, str(report_port)], oid)

    def release(self) -> bool:
        """Connection release: terminal acknowledgement, then teardown.
        Returns True when the agent acknowledged."""
        if self.closed:
            return False
        try:
            reply = self._exchange(MessageType.CONNECTION_RELEASE, [])
        except ManagerError:
            self.close()
            return False
        self.close()
        return reply.type == MessageType.RESPONSE

    def close(self) -> None:
        self.closed = True
        if self._stream is not None:
            try:
                self._stream.close()
            except OSError:
                pass
        if self._sock is not None:
            try:
                self._sock.close()
            except OSError:
                pass


# -- polling ---------------------------------------------------------------------

class PollTask:
    """Issues a GET every period and delivers (timestamp, instance, value)
    samples to the sink, in order.  The period is adjustable at runtime and
    takes effect before the next tick."""

    def __init__(self, session: ManagerSession, oid: str, period_ms: int,
                 sink: Callable[[float, str, str], None]):
        if session.closed:
            raise StoppedSession(session.label)
        if period_ms < 100:
            raise ValueError("period must be >= 100 ms")
        self.session = session
        self.oid = oid
        self.sink = sink
        self._period_ms = period_ms
        self._wake = threading.Event()
        self._stopped = False
        self.samples_taken = 0
        self._thread = threading.Thread(target=self._run, daemon=True,
                                        name=f"poll-{oid}")
        self._thread.start()

    @property
    def period_ms(self) -> int:
        return self._period_ms

    def set_period(self, period_ms: int) -> None:
        if period_ms < 100:
            raise ValueError("period must be >= 100 ms")
        self._period_ms = period_ms
        self._wake.set()

    def stop(self) -> None:
        self._stopped = True
        self._wake.set()
        self._thread.join(timeout=2.0)

    def _run(self) -> None:
        while not self._stopped:
            sampled_at = time.monotonic()
            try:
                instance, value = self.session.get(self.oid)
            except ManagerError:
                break
            self.samples_taken += 1
            try:
                self.sink(time.time(), instance, value)
            except Exception:
                pass
            while not self._stopped:
                deadline = sampled_at + self._period_ms / 1000.0
                remaining = deadline - time.monotonic()
                if remaining <= 0:
                    break
                if self._wake.wait(remaining):
                    self._wake.clear()  # period change: recompute deadline


# -- trap intake -------------------------------------------------------------------

class _TrapIntake:
    """Binds one UDP report port and fans incoming event reports out to
    registered sinks."""

    def __init__(self, port: int):
        self.port = port
        self._sock = socket.socket(socket.AF_INET, socket.SOCK_DGRAM)
        self._sock.setsockopt(socket.SOL_SOCKET, socket.SO_REUSEADDR, 1)
        self._sock.bind(("", port))
        self._sock.settimeout(0.2)
        self._sinks: list[tuple[Optional[str], Callable[[TrapEvent], None]]] = []
        self._stopped = threading.Event()
        self._thread = threading.Thread(target=self._run, daemon=True,
                                        name=f"trap-intake-{port}")
        self._thread.start()

    def add_sink(self, sink: Callable[[TrapEvent], None],
                 instance: Optional[str] = None) -> None:
        self._sinks.append((instance, sink))

    def _run(self) -> None:
        while not self._stopped.is_set():
            try:
                data, addr = self._sock.recvfrom(wire.MAX_UDP_PAYLOAD)
            except socket.timeout:
                continue
            except OSError:
                break
            try:
                message = wire.decode_message(data)
            except wire.DecodeError:
                continue
            if message.type != MessageType.EVENT_REPORT:
                continue
            try:
                event = TrapEvent(
                    instance=message.field_str(0),
                    value=message.field_str(1),
                    threshold=message.field_str(2),
                    timestamp_ms=int(message.field_str(3)),
                    source=addr)
            except (ValueError, IndexError):
                continue
            for wanted, sink in list(self._sinks):
                if wanted is None or wanted == event.instance:
                    try:
                        sink(event)
                    except Exception:
                        pass

    def stop(self) -> None:
        self._stopped.set()
        self._thread.join(timeout=2.0)
        self._sock.close()


# -- the manager ---------------------------------------------------------------------

class Manager:
    """Shared manager state: configuration, directory, log, listeners."""

    def __init__(self, community: str = "public",
                 key: Optional[security.RsaKeyPair] = None,
                 discovery_port: int = DEFAULT_DISCOVERY_PORT,
                 broadcast_address: str = "255.255.255.255",
                 log_path: Optional[str] = None):
        self.community = community
        self.key = key
        self.discovery_port = discovery_port
        self.broadcast_address = broadcast_address
        self.directory = AgentDirectory()
        self.log = OperationLog(log_path)
        self._listener: Optional[threading.Thread] = None
        self._listener_sock: Optional[socket.socket] = None
        self._listener_stop = threading.Event()
        self._intakes: dict[int, _TrapIntake] = {}
        self._corr = 0
        self._lock = threading.Lock()

    # -- discovery ----------------------------------------------------------

    def discover(self, timeout_ms: int = 2000,
                 broadcast_address: Optional[str] = None
                 ) -> list[DirectoryEntry]:
        """Broadcast one probe and collect replies until the timeout.
        Duplicate replies collapse into one directory entry.  Also makes
        sure the announce/farewell listener is running."""
        self.ensure_listener()
        address = broadcast_address or self.broadcast_address
        with self._lock:
            self._corr += 1
            corr = self._corr
        probe = wire.encode_message(make_message(
            MessageType.DISCOVERY_PROBE, [self.community],
            correlation_id=corr))
        sock = socket.socket(socket.AF_INET, socket.SOCK_DGRAM)
        sock.setsockopt(socket.SOL_SOCKET, socket.SO_BROADCAST, 1)
        found: dict[tuple[str, int], DirectoryEntry] = {}
        try:
            sock.sendto(probe, (address, self.discovery_port))
            deadline = time.monotonic() + timeout_ms / 1000.0
            while True:
                remaining = deadline - time.monotonic()
                if remaining <= 0:
                    break
                sock.settimeout(remaining)
                try:
                    data, addr = sock.recvfrom(wire.MAX_UDP_PAYLOAD)
                except socket.timeout:
                    break
                except OSError:
                    break
                try:
                    reply = wire.decode_message(data)
                except wire.DecodeError:
                    continue
                if reply.type != MessageType.DISCOVERY_REPLY:
                    continue
                if reply.correlation_id != corr:
                    continue
                host = reply.field_str(0, default="") or addr[0]
                try:
                    tcp_port = int(reply.field_str(1))
                    udp_port = int(reply.field_str(2))
                except (ValueError, IndexError):
                    continue
                entry = self.directory.upsert(host, tcp_port, udp_port)
                found[entry.key] = entry
        finally:
            sock.close()
        return sorted(found.values(), key=lambda e: (e.host, e.tcp_port))

    def ensure_listener(self) -> None:
        """Start (once) the background listener that applies agent
        announce/farewell broadcasts to the directory."""
        if self._listener is not None:
            return
        sock = socket.socket(socket.AF_INET, socket.SOCK_DGRAM)
        sock.setsockopt(socket.SOL_SOCKET, socket.SO_REUSEADDR, 1)
        sock.setsockopt(socket.SOL_SOCKET, socket.SO_REUSEPORT, 1)
        sock.bind(("", self.discovery_port))
        sock.settimeout(0.2)
        self._listener_sock = sock
        self._listener = threading.Thread(target=self._listen_presence,
                                          daemon=True, name="presence")
        self._listener.start()

    def _listen_presence(self) -> None:
        assert self._listener_sock is not None
        while not self._listener_stop.is_set():
            try:
                data, addr = self._listener_sock.recvfrom(wire.MAX_UDP_PAYLOAD)
            except socket.timeout:
                continue
            except OSError:
                break
            try:
                message = wire.decode_message(data)
            except wire.DecodeError:
                continue
            if message.type not in (MessageType.AGENT_ANNOUNCE,
                                    MessageType.AGENT_FAREWELL):
                continue
            if message.field_str(0, default="") != self.community:
                continue
            host = message.field_str(1, default="") or addr[0]
            try:
                tcp_port = int(message.field_str(2))
                udp_port = int(message.field_str(3))
            except (ValueError, IndexError):
                continue
            if message.type == MessageType.AGENT_ANNOUNCE:
                self.directory.upsert(host, tcp_port, udp_port)
            else:
                self.directory.remove(host, tcp_port)

    # -- sessions -------------------------------------------------------------

    def open_session(self, agent: Union[DirectoryEntry, str, tuple[str, int]],
                     transport: str = "tcp",
                     community: Optional[str] = None,
                     security_enabled: bool = False,
                     udp_port: Optional[int] = None) -> ManagerSession:
        """Connect (TCP) or allocate an endpoint (UDP) and initialise.

        ``agent`` may be a directory entry, a "host:tcp_port" string, or a
        (host, tcp_port) pair; the UDP port defaults to the directory's
        knowledge or tcp_port + 1.
        """
        if isinstance(agent, DirectoryEntry):
            host, tcp_port = agent.host, agent.tcp_port
            udp = agent.udp_port
        elif isinstance(agent, str):
            host, _, port_text = agent.partition(":")
            tcp_port = int(port_text) if port_text else DEFAULT_TCP_PORT
            udp = udp_port if udp_port is not None else tcp_port + 1
        else:
            host, tcp_port = agent
            udp = udp_port if udp_port is not None else tcp_port + 1
        if udp_port is not None:
            udp = udp_port
        return ManagerSession(self, host, tcp_port, udp,
                              transport=transport, community=community,
                              security_enabled=security_enabled)

    # -- polling / traps ----------------------------------------------------------

    def start_poll(self, session: ManagerSession, oid: str, period_ms: int,
                   sink: Callable[[float, str, str], None]) -> PollTask:
        return PollTask(session, oid, period_ms, sink)

    def subscribe_trap(self, session: ManagerSession, oid: str,
                       threshold: float, period_ms: int, report_port: int,
                       sink: Callable[[TrapEvent], None],
                       instance_filter: Optional[str] = None) -> _TrapIntake:
        """Register the report listener, then ask the agent to monitor the
        instance.  Events surface on the sink."""
        intake = self._intakes.get(report_port)
        if intake is None:
            intake = _TrapIntake(report_port)
            self._intakes[report_port] = intake
        intake.add_sink(sink, instance_filter)
        session.subscribe_trap(oid, threshold, period_ms, report_port)
        return intake

    def close(self) -> None:
        self._listener_stop.set()
        if self._listener is not None:
            self._listener.join(timeout=2.0)
        if self._listener_sock is not None:
            self._listener_sock.close()
        for intake in self._intakes.values():
            intake.stop()
        self._intakes.clear()
