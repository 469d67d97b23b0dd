"""The agent daemon.

A background process on the managed node: it compiles nothing itself, it
loads the record file produced by ``nm mib compile``, builds the object
tree, and then serves manager requests concurrently:

- an acceptor thread hands each TCP connection to its own session worker;
- a UDP receiver does the same per peer address (sessions expire after
  60 s idle, or immediately on a connection release);
- a discovery responder answers community-matched broadcast probes with
  the agent's address and ports;
- a trap monitor samples subscribed instances at each subscription's own
  period and emits an event report on every upward threshold crossing.

The object tree and record file are immutable once loaded, so workers
share them without locks; device state and the subscription registry take
short critical sections.
"""

from __future__ import annotations

import socket
import struct
import threading
import time
from dataclasses import dataclass, field
from typing import Optional

from nmlite import security, wire
from nmlite.device import (BadValue, DeviceStateProvider, NoSuchInstance,
                           SimulatedDevice, oid_sort_key)
from nmlite.mib import raf as raf_mod
from nmlite.mib import tree as tree_mod
from nmlite.wire import Message, MessageType, make_message

__all__ = [
    "AgentConfig", "load_config", "Agent", "AgentStartupError",
    "TrapSubscription", "trap_monitor_tick", "authenticate_request",
    "RequestHandler", "run_agent", "main",
    "EXIT_BAD_RAF", "EXIT_PORT_IN_USE", "EXIT_BAD_KEY",
]

EXIT_BAD_RAF = 2
EXIT_PORT_IN_USE = 3
EXIT_BAD_KEY = 4

_WRITABLE_ACCESS = ("read-write", "write-only")
TRAP_TICK_S = 0.05
UDP_RECV_SIZE = 65535


class AgentStartupError(Exception):
    def __init__(self, message: str, exit_code: int):
        self.exit_code = exit_code
        super().__init__(message)


@dataclass
class AgentConfig:
    raf_path: str
    device_state_path: str = ""
    host: str = "127.0.0.1"
    tcp_port: int = 7770
    udp_port: int = 7771
    discovery_port: int = 7772
    community: str = "public"
    key_file: str = ""
    security: bool = False
    announce: list[str] = field(default_factory=list)  # "broadcast" or host:port
    broadcast_address: str = "255.255.255.255"
    max_sessions: int = 32
    udp_idle_s: float = 60.0

    def __post_init__(self):
        if not self.community:
            raise ValueError("community must be non-empty")
        ports = (self.tcp_port, self.udp_port, self.discovery_port)
        if len(set(ports)) != len(ports):
            raise ValueError("tcp, udp and discovery ports must be distinct")


_BOOL = {"on": True, "true": True, "yes": True, "1": True,
         "off": False, "false": False, "no": False, "0": False}


def load_config(path: str) -> AgentConfig:
    """Read a key=value config file (# starts a comment)."""
    values: dict[str, str] = {}
    with open(path) as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            key, sep, value = line.partition("=")
            if not sep:
                raise ValueError(f"{path}:{lineno}: expected key=value")
            values[key.strip()] = value.strip()

    def take_int(key: str, default: int) -> int:
        return int(values.pop(key)) if key in values else default

    announce = [a.strip() for a in values.pop("announce", "").split(",")
                if a.strip()]
    config = AgentConfig(
        raf_path=values.pop("raf", ""),
        device_state_path=values.pop("device_state", ""),
        host=values.pop("host", "127.0.0.1"),
        tcp_port=take_int("tcp_port", 7770),
        udp_port=take_int("udp_port", 7771),
        discovery_port=take_int("discovery_port", 7772),
        community=values.pop("community", "public"),
        key_file=values.pop("key_file", ""),
        security=_BOOL.get(values.pop("security", "off").lower(), False),
        announce=announce,
        broadcast_address=values.pop("broadcast_address", "255.255.255.255"),
        max_sessions=take_int("max_sessions", 32),
    )
    if values:
        raise ValueError(f"{path}: unknown config keys {sorted(values)}")
    return config


# -- authentication ----------------------------------------------------------

def authenticate_request(message: Message, config: AgentConfig,
                         security_enabled: bool,
                         public_key: Optional[security.RsaKeyPair]
                         ) -> tuple[bool, str]:
    """Community check first, then (when required or offered) signature
    verification.  Returns (accepted, deny_reason)."""
    if message.field_str(0, default="") != config.community:
        return False, "community"
    if message.signed:
        if public_key is None:
            return False, "signature"
        if not security.verify_signed_message(message, public_key):
            return False, "signature"
    elif security_enabled:
        return False, "signature"
    return True, ""


# -- traps -------------------------------------------------------------------

@dataclass
class TrapSubscription:
    instance: str
    threshold: float
    period_ms: int
    report_address: tuple[str, int]
    last_sample_above: bool = False
    next_due: float = 0.0


def trap_monitor_tick(subscriptions: list[TrapSubscription],
                      provider: DeviceStateProvider, now: float,
                      stats: Optional[dict] = None
                      ) -> list[tuple[tuple[str, int], Message]]:
    """One pass over the subscriptions: sample every one that is due and
    emit an event report exactly on upward threshold crossings
    (value > threshold while the previous sample was not above)."""
    reports: list[tuple[tuple[str, int], Message]] = []
    for sub in subscriptions:
        if now < sub.next_due:
            continue
        sub.next_due = now + sub.period_ms / 1000.0
        try:
            value = provider.read(sub.instance)
        except Exception:
            if stats is not None:
                stats["trap_read_failures"] = stats.get("trap_read_failures", 0) + 1
            continue
        if not isinstance(value, (int, float)):
            continue
        above = value > sub.threshold
        if above and not sub.last_sample_above:
            reports.append((sub.report_address, make_message(
                MessageType.EVENT_REPORT,
                [sub.instance, str(value), _format_number(sub.threshold),
                 str(int(time.time() * 1000))])))
        sub.last_sample_above = above
    return reports


def _format_number(value: float) -> str:
    return str(int(value)) if float(value).is_integer() else repr(value)


# -- request handling ---------------------------------------------------------

class RequestHandler:
    """Authenticated request dispatch against the tree, record file and
    device provider.  One handler serves all sessions; it is stateless
    apart from the subscription registry."""

    def __init__(self, tree: tree_mod.MibTree, reader: raf_mod.RafReader,
                 provider: DeviceStateProvider,
                 key: Optional[security.RsaKeyPair], community: str):
        self.tree = tree
        self.reader = reader
        self.provider = provider
        self.key = key
        self.community = community
        self.subscriptions: list[TrapSubscription] = []
        self._subs_lock = threading.Lock()
        self._raf_lock = threading.Lock()

    # the only RAF access after startup; serialized because readers seek
    def _record(self, index: int):
        with self._raf_lock:
            return self.reader.read_record(index)

    def handle(self, message: Message, peer_host: str = "") -> Message:
        corr = message.correlation_id
        try:
            reply = self._dispatch(message, peer_host)
        except tree_mod.InvalidOid as exc:
            return _error(corr, wire.ERR_BAD_REQUEST, str(exc))
        except tree_mod.NoSuchObject as exc:
            return _error(corr, wire.ERR_NO_SUCH_OBJECT, str(exc))
        except tree_mod.EndOfMib as exc:
            return _error(corr, wire.ERR_END_OF_MIB, str(exc))
        except NoSuchInstance as exc:
            return _error(corr, wire.ERR_NO_SUCH_INSTANCE, str(exc))
        except BadValue as exc:
            return _error(corr, wire.ERR_BAD_REQUEST, str(exc))
        except IndexError:
            return _error(corr, wire.ERR_BAD_REQUEST, "missing message field")
        reply.correlation_id = corr
        if (message.signed and self.key is not None
                and reply.type == MessageType.RESPONSE
                and message.type in (MessageType.GET, MessageType.GET_NEXT,
                                     MessageType.SET)):
            reply.fields[1] = security.encrypt(reply.fields[1], self.key)
            reply.flags |= wire.FLAG_ENCRYPTED
        return reply

    def _dispatch(self, message: Message, peer_host: str) -> Message:
        mtype = message.type
        if mtype == MessageType.INITIALISE:
            return make_message(MessageType.RESPONSE,
                                [wire.encode_level(self.tree.root_level())])
        if mtype == MessageType.NEXT_LEVEL:
            level = self.tree.next_level(message.field_str(1))
            return make_message(MessageType.RESPONSE, [wire.encode_level(level)])
        if mtype == MessageType.UPPER_LEVEL:
            level = self.tree.upper_level(message.field_str(1))
            return make_message(MessageType.RESPONSE, [wire.encode_level(level)])
        if mtype == MessageType.GET:
            return self._get(message.field_str(1))
        if mtype == MessageType.GET_NEXT:
            return self._get_next(message.field_str(1))
        if mtype == MessageType.SET:
            return self._set(message.field_str(1), message.field_str(2))
        if mtype == MessageType.DESCRIBE:
            return self._describe(message.field_str(1))
        if mtype == MessageType.SUBSCRIBE_TRAP:
            return self._subscribe(message, peer_host)
        if mtype == MessageType.CONNECTION_RELEASE:
            return make_message(MessageType.RESPONSE, ["bye"])
        return _error(message.correlation_id, wire.ERR_BAD_REQUEST,
                      f"unexpected message type {mtype.name}")

    def _resolve_instance(self, oid_text: str) -> tuple[tree_mod.MibTreeNode, str]:
        node, suffix = self.tree.resolve_instance(oid_text)
        if not suffix:
            raise NoSuchInstance(f"{oid_text} names an object, not an instance")
        instance = node.numeric_oid() + "." + ".".join(str(s) for s in suffix)
        return node, instance

    def _get(self, oid_text: str) -> Message:
        _node, instance = self._resolve_instance(oid_text)
        value = self.provider.read(instance)
        return make_message(MessageType.RESPONSE, [instance, str(value)])

    def _get_next(self, oid_text: str) -> Message:
        node, suffix = self.tree.resolve_instance(oid_text)
        position = node.oid + suffix
        # first instance beyond the current position, looking under the
        # resolved node's subtree first, then under successor objects
        for candidate in self._instances_under(node):
            if oid_sort_key(candidate) > position:
                return self._reply_with(candidate)
        while True:
            node = self.tree.object_successor(node)  # EndOfMib surfaces here
            instances = self._instances_under(node)
            if instances:
                return self._reply_with(instances[0])

    def _reply_with(self, instance: str) -> Message:
        value = self.provider.read(instance)
        return make_message(MessageType.RESPONSE, [instance, str(value)])

    def _instances_under(self, node: tree_mod.MibTreeNode) -> list[str]:
        prefix = node.numeric_oid() + "."
        return [oid for oid in self.provider.instances()
                if oid.startswith(prefix)]

    def _set(self, oid_text: str, value: str) -> Message:
        node, instance = self._resolve_instance(oid_text)
        if node.raf_index is None:
            raise tree_mod.NoSuchObject(f"{oid_text} has no object definition")
        record = self._record(node.raf_index)
        if record.access not in _WRITABLE_ACCESS:
            return _error(0, wire.ERR_NOT_WRITABLE,
                          f"{record.name} is {record.access or 'inaccessible'}")
        stored = self.provider.write(instance, value)
        return make_message(MessageType.RESPONSE, [instance, str(stored)])

    def _describe(self, oid_text: str) -> Message:
        node, _suffix = self.tree.resolve_instance(oid_text)
        if node.raf_index is None:
            raise tree_mod.NoSuchObject(
                f"{oid_text} has no compiled record to describe")
        record = self._record(node.raf_index)
        return make_message(MessageType.RESPONSE,
                            [record.name, record.syntax, record.access,
                             record.status, record.description])

    def _subscribe(self, message: Message, peer_host: str) -> Message:
        oid_text = message.field_str(1)
        try:
            threshold = float(message.field_str(2))
            period_ms = int(message.field_str(3))
        except ValueError:
            return _error(0, wire.ERR_BAD_REQUEST,
                          "threshold/period must be numeric")
        if period_ms < 100:
            return _error(0, wire.ERR_BAD_REQUEST, "period must be >= 100 ms")
        report_host = message.field_str(4, default="") or peer_host
        try:
            report_port = int(message.field_str(5))
        except (ValueError, IndexError):
            return _error(0, wire.ERR_BAD_REQUEST, "bad report port")
        _node, instance = self._resolve_instance(oid_text)
        value = self.provider.read(instance)
        if not isinstance(value, (int, float)):
            return _error(0, wire.ERR_BAD_REQUEST,
                          f"{instance} is not numeric; cannot monitor")
        sub = TrapSubscription(instance=instance, threshold=threshold,
                               period_ms=period_ms,
                               report_address=(report_host, report_port))
        with self._subs_lock:
            self.subscriptions.append(sub)
        return make_message(MessageType.RESPONSE, ["ok"])

    def tick_subscriptions(self, now: float, stats: dict
                           ) -> list[tuple[tuple[str, int], Message]]:
        with self._subs_lock:
            subs = list(self.subscriptions)
        return trap_monitor_tick(subs, self.provider, now, stats)


def _error(correlation_id: int, reason: str, detail: str = "") -> Message:
    return make_message(MessageType.ERROR_RESPONSE, [reason, detail],
                        correlation_id=correlation_id)


# -- the daemon ----------------------------------------------------------------

class Agent:
    """Owns the sockets and worker threads.  ``start()`` binds and spawns;
    ``stop()`` says farewell and joins everything."""

    def __init__(self, config: AgentConfig):
        self.config = config
        self.handler: Optional[RequestHandler] = None
        self.stats: dict[str, int] = {}
        self._stats_lock = threading.Lock()
        self._stop = threading.Event()
        self._threads: list[threading.Thread] = []
        self._tcp_listener: Optional[socket.socket] = None
        self._udp_sock: Optional[socket.socket] = None
        self._discovery_sock: Optional[socket.socket] = None
        self._udp_workers: dict[tuple[str, int], "_UdpWorker"] = {}
        self._udp_lock = threading.Lock()
        self._tcp_workers = 0
        self._raf_file = None

    # -- lifecycle ------------------------------------------------------

    def start(self) -> None:
        cfg = self.config
        try:
            self._raf_file = open(cfg.raf_path, "rb")
            reader = raf_mod.RafReader(self._raf_file)
            tree = tree_mod.build_tree(reader)
        except (OSError, raf_mod.RafError, tree_mod.TreeError) as exc:
            raise AgentStartupError(f"cannot load record file: {exc}",
                                    EXIT_BAD_RAF) from exc

        key = None
        if cfg.key_file:
            try:
                key = security.load_key_file(cfg.key_file)
            except security.BadKeyFile as exc:
                raise AgentStartupError(str(exc), EXIT_BAD_KEY) from exc

        if cfg.device_state_path:
            provider: DeviceStateProvider = SimulatedDevice.from_file(
                cfg.device_state_path)
        else:
            provider = SimulatedDevice()

        self.handler = RequestHandler(tree, reader, provider, key,
                                      cfg.community)
        try:
            self._tcp_listener = socket.socket(socket.AF_INET,
                                               socket.SOCK_STREAM)
            self._tcp_listener.setsockopt(socket.SOL_SOCKET,
                                          socket.SO_REUSEADDR, 1)
            self._tcp_listener.bind((cfg.host, cfg.tcp_port))
            self._tcp_listener.listen(16)
            self._tcp_listener.settimeout(0.2)

            self._udp_sock = socket.socket(socket.AF_INET, socket.SOCK_DGRAM)
            self._udp_sock.bind((cfg.host, cfg.udp_port))
            self._udp_sock.settimeout(0.2)

            self._discovery_sock = socket.socket(socket.AF_INET,
                                                 socket.SOCK_DGRAM)
            self._discovery_sock.setsockopt(socket.SOL_SOCKET,
                                            socket.SO_REUSEADDR, 1)
            self._discovery_sock.setsockopt(socket.SOL_SOCKET,
                                            socket.SO_REUSEPORT, 1)
            self._discovery_sock.bind(("", cfg.discovery_port))
            self._discovery_sock.settimeout(0.2)
        except OSError as exc:
            self._close_sockets()
            raise AgentStartupError(f"cannot bind: {exc}",
                                    EXIT_PORT_IN_USE) from exc

        for name, target in (("tcp-acceptor", self._tcp_loop),
                             ("udp-receiver", self._udp_loop),
                             ("discovery", self._discovery_loop),
                             ("trap-monitor", self._trap_loop)):
            thread = threading.Thread(target=target, name=name, daemon=True)
            thread.start()
            self._threads.append(thread)

        self._send_presence(MessageType.AGENT_ANNOUNCE)

    def stop(self) -> None:
        if self._stop.is_set():
            return
        self._send_presence(MessageType.AGENT_FAREWELL)
        self._stop.set()
        for thread in self._threads:
            thread.join(timeout=2.0)
        self._close_sockets()
        if self._raf_file is not None:
            self._raf_file.close()

    def _close_sockets(self) -> None:
        for sock in (self._tcp_listener, self._udp_sock,
                     self._discovery_sock):
            if sock is not None:
                try:
                    sock.close()
                except OSError:
                    pass

    def _bump(self, counter: str, amount: int = 1) -> None:
        with self._stats_lock:
            self.stats[counter] = self.stats.get(counter, 0) + amount

    # -- presence --------------------------------------------------------

    def _presence_targets(self) -> list[tuple[str, int]]:
        targets: list[tuple[str, int]] = []
        for entry in self.config.announce:
            if entry == "broadcast":
                targets.append((self.config.broadcast_address,
                                self.config.discovery_port))
            else:
                host, _, port = entry.partition(":")
                targets.append((host, int(port) if port
                                else self.config.discovery_port))
        return targets

    def _send_presence(self, mtype: MessageType) -> None:
        targets = self._presence_targets()
        if not targets:
            return
        cfg = self.config
        payload = wire.encode_message(make_message(
            mtype, [cfg.community, cfg.host, str(cfg.tcp_port),
                    str(cfg.udp_port)]))
        sock = socket.socket(socket.AF_INET, socket.SOCK_DGRAM)
        sock.setsockopt(socket.SOL_SOCKET, socket.SO_BROADCAST, 1)
        try:
            for target in targets:
                try:
                    sock.sendto(payload, target)
                except OSError:
                    pass
        finally:
            sock.close()

    # -- request processing (shared by transports) ------------------------

    def _process(self, message: Message, peer_host: str
                 ) -> tuple[Message, bool]:
        """Returns (reply, close_session_after)."""
        assert self.handler is not None
        accepted, reason = authenticate_request(
            message, self.config, self.config.security,
            self.handler.key)
        if not accepted:
            self._bump(f"denied_{reason}")
            reply = _error(message.correlation_id, wire.ERR_DENIED,
                           f"access denial to system information ({reason})")
            return reply, False
        self._bump("dispatched")
        reply = self.handler.handle(message, peer_host)
        return reply, message.type == MessageType.CONNECTION_RELEASE

    # -- TCP --------------------------------------------------------------

    def _tcp_loop(self) -> None:
        assert self._tcp_listener is not None
        while not self._stop.is_set():
            try:
                conn, addr = self._tcp_listener.accept()
            except socket.timeout:
                continue
            except OSError:
                break
            with self._stats_lock:
                busy = self._tcp_workers >= self.config.max_sessions
                if not busy:
                    self._tcp_workers += 1
            if busy:
                try:
                    payload = wire.encode_message(
                        _error(0, wire.ERR_BUSY, "worker limit reached"))
                    conn.sendall(struct.pack(">I", len(payload)) + payload)
                finally:
                    conn.close()
                continue
            worker = threading.Thread(target=self._tcp_session,
                                      args=(conn, addr),
                                      name=f"session-{addr[0]}:{addr[1]}",
                                      daemon=True)
            worker.start()

    def _tcp_session(self, conn: socket.socket, addr: tuple[str, int]) -> None:
        conn.settimeout(None)
        stream = conn.makefile("rb")
        try:
            while not self._stop.is_set():
                try:
                    payload = wire.read_frame(stream)
                except (wire.PeerClosed, wire.Truncated, OSError):
                    break
                try:
                    message = wire.decode_message(payload)
                except wire.DecodeError as exc:
                    reply = _error(0, wire.ERR_BAD_REQUEST, str(exc))
                    close_after = False
                else:
                    reply, close_after = self._process(message, addr[0])
                out = wire.encode_message(reply)
                try:
                    conn.sendall(struct.pack(">I", len(out)) + out)
                except OSError:
                    break
                if close_after:
                    break
        finally:
            stream.close()
            conn.close()
            with self._stats_lock:
                self._tcp_workers -= 1

    # -- UDP ---------------------------------------------------------------

    def _udp_loop(self) -> None:
        assert self._udp_sock is not None
        while not self._stop.is_set():
            try:
                data, addr = self._udp_sock.recvfrom(UDP_RECV_SIZE)
            except socket.timeout:
                continue
            except OSError:
                break
            with self._udp_lock:
                worker = self._udp_workers.get(addr)
                if worker is None:
                    if len(self._udp_workers) >= self.config.max_sessions:
                        self._udp_reply(
                            wire.encode_message(_error(0, wire.ERR_BUSY,
                                                       "worker limit reached")),
                            addr)
                        continue
                    worker = _UdpWorker(self, addr)
                    self._udp_workers[addr] = worker
                    worker.thread.start()
            worker.queue.put(data)

    def _udp_reply(self, payload: bytes, addr: tuple[str, int]) -> None:
        if self._udp_sock is None or len(payload) > wire.MAX_UDP_PAYLOAD:
            return
        try:
            self._udp_sock.sendto(payload, addr)
        except OSError:
            pass

    def _drop_udp_worker(self, addr: tuple[str, int]) -> None:
        with self._udp_lock:
            self._udp_workers.pop(addr, None)

    # -- discovery -----------------------------------------------------------

    def _discovery_loop(self) -> None:
        assert self._discovery_sock is not None
        cfg = self.config
        while not self._stop.is_set():
            try:
                data, addr = self._discovery_sock.recvfrom(UDP_RECV_SIZE)
            except socket.timeout:
                continue
            except OSError:
                break
            try:
                message = wire.decode_message(data)
            except wire.DecodeError:
                continue  # scanners get no oracle
            if message.type != MessageType.DISCOVERY_PROBE:
                continue
            if message.field_str(0, default="") != cfg.community:
                continue  # silent drop
            reply = make_message(
                MessageType.DISCOVERY_REPLY,
                [cfg.host, str(cfg.tcp_port), str(cfg.udp_port)],
                correlation_id=message.correlation_id)
            try:
                self._discovery_sock.sendto(wire.encode_message(reply), addr)
            except OSError:
                pass

    # -- traps ------------------------------------------------------------------

    def _trap_loop(self) -> None:
        assert self.handler is not None
        sock = socket.socket(socket.AF_INET, socket.SOCK_DGRAM)
        try:
            while not self._stop.wait(TRAP_TICK_S):
                reports = self.handler.tick_subscriptions(time.monotonic(),
                                                          self.stats)
                for address, message in reports:
                    self._bump("trap_reports")
                    try:
                        sock.sendto(wire.encode_message(message), address)
                    except OSError:
                        pass
        finally:
            sock.close()


class _UdpWorker:
    """One session worker per UDP peer, fed through a queue by the
    receiver; expires after the configured idle time or on release."""

    def __init__(self, agent: Agent, addr: tuple[str, int]):
        import queue

        self.agent = agent
        self.addr = addr
        self.queue: "queue.Queue[bytes]" = queue.Queue()
        self.thread = threading.Thread(
            target=self._run, name=f"udp-session-{addr[0]}:{addr[1]}",
            daemon=True)

    def _run(self) -> None:
        import queue as queue_mod

        agent = self.agent
        while not agent._stop.is_set():
            try:
                data = self.queue.get(timeout=agent.config.udp_idle_s)
            except queue_mod.Empty:
                break
            try:
                message = wire.decode_message(data)
            except wire.DecodeError as exc:
                agent._udp_reply(wire.encode_message(
                    _error(0, wire.ERR_BAD_REQUEST, str(exc))), self.addr)
                continue
            reply, close_after = agent._process(message, self.addr[0])
            agent._udp_reply(wire.encode_message(reply), self.addr)
            if close_after:
                break
        agent._drop_udp_worker(self.addr)


def run_agent(config: AgentConfig) -> None:
    """Start the daemon and serve until interrupted."""
    agent = Agent(config)
    agent.start()
    try:
        while True:
            time.sleep(3600)
    except KeyboardInterrupt:
        pass
    finally:
        agent.stop()


def main(argv: Optional[list[str]] = None) -> int:
    import argparse
    import sys

    parser = argparse.ArgumentParser(
        prog="nm-agent", description="run the management agent daemon")
    parser.add_argument("config", help="path to a key=value config file")
    args = parser.parse_args(argv)
    try:
        config = load_config(args.config)
    except (OSError, ValueError) as exc:
        print(f"nm-agent: {exc}", file=sys.stderr)
        return 1
    try:
        run_agent(config)
    except AgentStartupError as exc:
        print(f"nm-agent: {exc}", file=sys.stderr)
        return exc.exit_code
    return 0


if __name__ == "__main__":  # pragma: no cover
    raise SystemExit(main())
