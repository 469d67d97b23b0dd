"""HTTP + server-push gateway: the browser UI's way into the manager.

Every route is a transparent JSON rendering of a manager-library call;
nothing here re-implements protocol behaviour.  Trap events, poll samples
and directory changes fan out on ``GET /events`` as a server-sent event
stream.

Routes:

    GET    /agents
    POST   /discover                 {timeout_ms?, broadcast?}
    POST   /sessions                 {agent, transport?, community?, secure?}
    DELETE /sessions/{id}
    GET    /sessions/{id}/level?oid=
    GET    /sessions/{id}/upper?oid=
    POST   /sessions/{id}/request    {type: get|getnext|set|describe, oid, value?}
    PUT    /sessions/{id}/settings   {transport?, secure?, community?}
    POST   /sessions/{id}/polls      {oid, period_ms}
    PUT    /polls/{pid}              {period_ms}
    POST   /sessions/{id}/traps      {oid, threshold, period_ms}
    GET    /events                   server-sent event stream
    GET    /log?tail=N

Status codes: 400 bad input, 404 unknown session/OID, 502 agent
unreachable or denied, 504 request timeout.
"""

from __future__ import annotations

import json
import queue
import secrets
import socket
import threading
import time
from dataclasses import dataclass, field
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from typing import Any, Optional
from urllib.parse import parse_qs, urlparse

from nmlite.manager import (AgentError, ConnectTimeout, DeniedByAgent,
                            DirectoryEntry, InvalidOid, Manager, ManagerError,
                            ManagerSession, PollTask, RequestTimeout,
                            StoppedSession, TrapEvent)
from nmlite import wire

__all__ = ["GatewayApp", "GatewayServer", "serve_gateway", "main"]

_NOT_FOUND_REASONS = {wire.ERR_NO_SUCH_OBJECT, wire.ERR_NO_SUCH_INSTANCE,
                      wire.ERR_END_OF_MIB}


class HttpError(Exception):
    def __init__(self, status: int, message: str):
        self.status = status
        self.message = message
        super().__init__(message)


class EventHub:
    """Fan-out of gateway events to any number of stream subscribers."""

    def __init__(self) -> None:
        self._subscribers: list[queue.Queue] = []
        self._lock = threading.Lock()

    def subscribe(self) -> queue.Queue:
        q: queue.Queue = queue.Queue(maxsize=1000)
        with self._lock:
            self._subscribers.append(q)
        return q

    def unsubscribe(self, q: queue.Queue) -> None:
        with self._lock:
            if q in self._subscribers:
                self._subscribers.remove(q)

    def publish(self, kind: str, payload: dict) -> None:
        event = {"kind": kind, **payload}
        with self._lock:
            targets = list(self._subscribers)
        for q in targets:
            try:
                q.put_nowait(event)
            except queue.Full:
                pass


@dataclass
class GatewaySession:
    id: str
    entry: tuple[str, int, int]  # host, tcp_port, udp_port
    session: ManagerSession
    transport: str
    polls: dict[str, PollTask] = field(default_factory=dict)
    trap_count: int = 0


def _entry_json(entry: DirectoryEntry) -> dict:
    return {"host": entry.host, "tcp_port": entry.tcp_port,
            "udp_port": entry.udp_port, "first_seen": entry.first_seen,
            "last_seen": entry.last_seen}


def _level_json(level: list[tuple[str, int]]) -> list[dict]:
    return [{"name": name, "identifier": identifier}
            for name, identifier in level]


class GatewayApp:
    """Route handling over a manager instance; transport-server agnostic."""

    def __init__(self, manager: Manager, trap_report_port: int = 0):
        self.manager = manager
        self.hub = EventHub()
        self.sessions: dict[str, GatewaySession] = {}
        self.polls: dict[str, tuple[GatewaySession, PollTask]] = {}
        self._lock = threading.Lock()
        if trap_report_port == 0:
            probe = socket.socket(socket.AF_INET, socket.SOCK_DGRAM)
            probe.bind(("", 0))
            trap_report_port = probe.getsockname()[1]
            probe.close()
        self.trap_report_port = trap_report_port
        manager.directory.observe(self._directory_changed)

    # -- event sources ------------------------------------------------------

    def _directory_changed(self, action: str, entry: DirectoryEntry) -> None:
        self.hub.publish("directory", {"action": action,
                                       "entry": _entry_json(entry)})

    def _trap_sink(self, event: TrapEvent) -> None:
        self.hub.publish("trap", {
            "instance": event.instance, "value": event.value,
            "threshold": event.threshold, "timestamp_ms": event.timestamp_ms})

    def _poll_sink(self, poll_id: str, session_id: str):
        def sink(timestamp: float, instance: str, value: str) -> None:
            self.hub.publish("poll_sample", {
                "poll_id": poll_id, "session_id": session_id,
                "timestamp": timestamp, "instance": instance, "value": value})
        return sink

    # -- route bodies --------------------------------------------------------

    def handle(self, method: str, path: str, query: dict[str, str],
               body: Optional[dict]) -> Any:
        parts = [p for p in path.split("/") if p]
        try:
            return self._route(method, parts, query, body or {})
        except HttpError:
            raise
        except InvalidOid as exc:
            raise HttpError(400, f"invalid OID: {exc}")
        except DeniedByAgent as exc:
            raise HttpError(502, f"agent denied the request: {exc.detail}")
        except AgentError as exc:
            status = 404 if exc.reason in _NOT_FOUND_REASONS else 400
            raise HttpError(status, str(exc))
        except (ConnectTimeout,) as exc:
            raise HttpError(502, f"agent unreachable: {exc}")
        except (RequestTimeout,) as exc:
            raise HttpError(504, f"request timed out: {exc}")
        except StoppedSession:
            raise HttpError(404, "session is closed")
        except (KeyError, ValueError, TypeError) as exc:
            raise HttpError(400, f"bad request: {exc}")

    def _route(self, method: str, parts: list[str], query: dict[str, str],
               body: dict) -> Any:
        if method == "GET" and parts == ["agents"]:
            return [_entry_json(e) for e in self.manager.directory.snapshot()]

        if method == "POST" and parts == ["discover"]:
            timeout_ms = int(body.get("timeout_ms", 2000))
            entries = self.manager.discover(
                timeout_ms=timeout_ms,
                broadcast_address=body.get("broadcast"))
            return [_entry_json(e) for e in entries]

        if method == "POST" and parts == ["sessions"]:
            return self._open_session(body)

        if len(parts) == 2 and parts[0] == "sessions":
            if method == "DELETE":
                return self._close_session(parts[1])

        if len(parts) == 3 and parts[0] == "sessions":
            gs = self._session(parts[1])
            action = parts[2]
            if method == "GET" and action == "level":
                return _level_json(gs.session.next_level(
                    self._oid_param(query)))
            if method == "GET" and action == "upper":
                return _level_json(gs.session.upper_level(
                    self._oid_param(query)))
            if method == "POST" and action == "request":
                return self._request(gs, body)
            if method == "PUT" and action == "settings":
                return self._settings(gs, body)
            if method == "POST" and action == "polls":
                return self._start_poll(gs, body)
            if method == "POST" and action == "traps":
                return self._subscribe_trap(gs, body)

        if len(parts) == 2 and parts[0] == "polls" and method == "PUT":
            return self._set_poll_period(parts[1], body)

        if method == "GET" and parts == ["log"]:
            count = int(query.get("tail", "50"))
            return {"lines": [e.format_line()
                              for e in self.manager.log.tail(count)]}

        raise HttpError(404, f"no route {method} /{'/'.join(parts)}")

    @staticmethod
    def _oid_param(query: dict[str, str]) -> str:
        oid = query.get("oid", "")
        if not oid:
            raise HttpError(400, "missing oid query parameter")
        return oid

    def _session(self, session_id: str) -> GatewaySession:
        with self._lock:
            gs = self.sessions.get(session_id)
        if gs is None:
            raise HttpError(404, f"unknown session {session_id}")
        return gs

    def _open_session(self, body: dict) -> dict:
        agent = body.get("agent")
        if isinstance(agent, str):
            host, _, port_text = agent.partition(":")
            tcp_port = int(port_text) if port_text else 7770
            udp_port = int(body.get("udp_port", tcp_port + 1))
        elif isinstance(agent, dict):
            host = agent["host"]
            tcp_port = int(agent["tcp_port"])
            udp_port = int(agent.get("udp_port", tcp_port + 1))
        else:
            raise HttpError(400, "body needs an agent")
        transport = body.get("transport", "tcp")
        session = self.manager.open_session(
            (host, tcp_port), transport=transport,
            community=body.get("community"),
            security_enabled=bool(body.get("secure", False)),
            udp_port=udp_port)
        gs = GatewaySession(id=secrets.token_hex(16),
                            entry=(host, tcp_port, udp_port),
                            session=session, transport=transport)
        with self._lock:
            self.sessions[gs.id] = gs
        return {"session_id": gs.id,
                "root_level": _level_json(session.root_level)}

    def _close_session(self, session_id: str) -> dict:
        with self._lock:
            gs = self.sessions.pop(session_id, None)
        if gs is None:
            raise HttpError(404, f"unknown session {session_id}")
        for poll_id, task in list(gs.polls.items()):
            task.stop()
            self.polls.pop(poll_id, None)
        gs.session.release()
        return {"closed": True}

    def _request(self, gs: GatewaySession, body: dict) -> dict:
        rtype = body.get("type", "")
        oid = body.get("oid", "")
        if not oid:
            raise HttpError(400, "request needs an oid")
        session = gs.session
        if rtype == "get":
            instance, value = session.get(oid)
            return {"oid": instance, "value": value}
        if rtype == "getnext":
            instance, value = session.get_next(oid)
            return {"oid": instance, "value": value}
        if rtype == "set":
            if "value" not in body:
                raise HttpError(400, "set needs a value")
            instance, value = session.set(oid, str(body["value"]))
            return {"oid": instance, "value": value}
        if rtype == "describe":
            result = session.describe(oid)
            return {"name": result.name, "syntax": result.syntax,
                    "access": result.access, "status": result.status,
                    "description": result.description}
        raise HttpError(400, f"unknown request type {rtype!r}")

    def _settings(self, gs: GatewaySession, body: dict) -> dict:
        session = gs.session
        if "secure" in body:
            session.security_enabled = bool(body["secure"])
        if "community" in body:
            session.community = str(body["community"])
        if "transport" in body and body["transport"] != gs.transport:
            transport = body["transport"]
            if transport not in ("tcp", "udp"):
                raise HttpError(400, f"unknown transport {transport!r}")
            host, tcp_port, udp_port = gs.entry
            replacement = self.manager.open_session(
                (host, tcp_port), transport=transport,
                community=session.community,
                security_enabled=session.security_enabled,
                udp_port=udp_port)
            gs.session.close()
            gs.session = replacement
            gs.transport = transport
        return {"transport": gs.transport,
                "secure": gs.session.security_enabled,
                "community": gs.session.community}

    def _start_poll(self, gs: GatewaySession, body: dict) -> dict:
        oid = body["oid"]
        period_ms = int(body["period_ms"])
        poll_id = secrets.token_hex(8)
        task = self.manager.start_poll(gs.session, oid, period_ms,
                                       self._poll_sink(poll_id, gs.id))
        gs.polls[poll_id] = task
        with self._lock:
            self.polls[poll_id] = (gs, task)
        return {"poll_id": poll_id, "period_ms": period_ms}

    def _set_poll_period(self, poll_id: str, body: dict) -> dict:
        with self._lock:
            entry = self.polls.get(poll_id)
        if entry is None:
            raise HttpError(404, f"unknown poll {poll_id}")
        _gs, task = entry
        task.set_period(int(body["period_ms"]))
        return {"poll_id": poll_id, "period_ms": task.period_ms}

    def _subscribe_trap(self, gs: GatewaySession, body: dict) -> dict:
        oid = body["oid"]
        threshold = float(body["threshold"])
        period_ms = int(body["period_ms"])
        self.manager.subscribe_trap(gs.session, oid, threshold, period_ms,
                                    self.trap_report_port, self._trap_sink)
        gs.trap_count += 1
        return {"subscribed": True, "report_port": self.trap_report_port}

    def close(self) -> None:
        with self._lock:
            sessions = list(self.sessions.values())
            self.sessions.clear()
        for gs in sessions:
            for task in gs.polls.values():
                task.stop()
            gs.session.close()


class _Handler(BaseHTTPRequestHandler):
    app: GatewayApp  # set by server factory
    protocol_version = "HTTP/1.1"

    def log_message(self, format, *args):  # quiet
        pass

    def _read_body(self) -> Optional[dict]:
        length = int(self.headers.get("Content-Length") or 0)
        if length == 0:
            return None
        raw = self.rfile.read(length)
        try:
            parsed = json.loads(raw.decode("utf-8"))
        except (ValueError, UnicodeDecodeError):
            raise HttpError(400, "body is not valid JSON")
        if not isinstance(parsed, dict):
            raise HttpError(400, "body must be a JSON object")
        return parsed

    def _send_json(self, status: int, payload: Any) -> None:
        data = json.dumps(payload).encode("utf-8")
        self.send_response(status)
        self.send_header("Content-Type", "application/json")
        self.send_header("Content-Length", str(len(data)))
        self.send_header("Access-Control-Allow-Origin", "*")
        self.end_headers()
        self.wfile.write(data)

    def _dispatch(self, method: str) -> None:
        parsed = urlparse(self.path)
        query = {k: v[0] for k, v in parse_qs(parsed.query).items()}
        if method == "GET" and parsed.path == "/events":
            self._serve_events()
            return
        try:
            body = self._read_body()
            result = self.app.handle(method, parsed.path, query, body)
            self._send_json(200, result)
        except HttpError as exc:
            self._send_json(exc.status, {"error": exc.message})
        except Exception as exc:  # defensive: never kill the connection thread
            self._send_json(500, {"error": f"internal error: {exc}"})

    def do_GET(self):
        self._dispatch("GET")

    def do_POST(self):
        self._dispatch("POST")

    def do_PUT(self):
        self._dispatch("PUT")

    def do_DELETE(self):
        self._dispatch("DELETE")

    def _serve_events(self) -> None:
        q = self.app.hub.subscribe()
        try:
            self.send_response(200)
            self.send_header("Content-Type", "text/event-stream")
            self.send_header("Cache-Control", "no-cache")
            self.send_header("Access-Control-Allow-Origin", "*")
            self.send_header("Connection", "close")
            self.end_headers()
            self.wfile.write(b": connected\n\n")
            self.wfile.flush()
            while True:
                try:
                    event = q.get(timeout=10.0)
                except queue.Empty:
                    self.wfile.write(b": ping\n\n")
                    self.wfile.flush()
                    continue
                data = json.dumps(event)
                self.wfile.write(f"data: {data}\n\n".encode("utf-8"))
                self.wfile.flush()
        except (BrokenPipeError, ConnectionResetError, OSError):
            pass
        finally:
            self.app.hub.unsubscribe(q)


class GatewayServer:
    """Embeddable gateway server (used by tests and the console script)."""

    def __init__(self, manager: Manager, host: str = "127.0.0.1",
                 port: int = 0):
        self.app = GatewayApp(manager)
        handler = type("BoundHandler", (_Handler,), {"app": self.app})
        self.httpd = ThreadingHTTPServer((host, port), handler)
        self.httpd.daemon_threads = True
        self.port = self.httpd.server_address[1]
        self._thread: Optional[threading.Thread] = None

    def start(self) -> None:
        self._thread = threading.Thread(target=self.httpd.serve_forever,
                                        name="gateway", daemon=True)
        self._thread.start()

    def stop(self) -> None:
        self.httpd.shutdown()
        if self._thread is not None:
            self._thread.join(timeout=2.0)
        self.httpd.server_close()
        self.app.close()


def serve_gateway(bind: tuple[str, int], manager: Manager) -> None:
    """Blocking variant: serve until interrupted."""
    server = GatewayServer(manager, host=bind[0], port=bind[1])
    print(f"gateway listening on http://{bind[0]}:{server.port}")
    server.start()
    try:
        while True:
            time.sleep(3600)
    except KeyboardInterrupt:
        pass
    finally:
        server.stop()


def main(argv: Optional[list[str]] = None) -> int:
    import argparse

    from nmlite import security

    parser = argparse.ArgumentParser(
        prog="nm-gateway", description="HTTP gateway for the browser UI")
    parser.add_argument("--bind", default="127.0.0.1")
    parser.add_argument("--port", type=int, default=7780)
    parser.add_argument("--community", default="public")
    parser.add_argument("--key-file")
    parser.add_argument("--discovery-port", type=int, default=7772)
    parser.add_argument("--broadcast", default="255.255.255.255")
    parser.add_argument("--log-file")
    args = parser.parse_args(argv)
    key = security.load_key_file(args.key_file) if args.key_file else None
    manager = Manager(community=args.community, key=key,
                      discovery_port=args.discovery_port,
                      broadcast_address=args.broadcast,
                      log_path=args.log_file)
    serve_gateway((args.bind, args.port), manager)
    return 0


if __name__ == "__main__":  # pragma: no cover
    raise SystemExit(main())
