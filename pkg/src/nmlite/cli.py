"""The ``nm`` command line: MIB compiler, discovery, per-request commands,
polling, trap watching, key generation, and the response-time benchmark.

Every subcommand is a thin wrapper over the manager library; no protocol
logic lives here.  Exit codes: 0 success, 1 usage error, 2 connection
problem, 3 agent-reported error.
"""

from __future__ import annotations

import argparse
import statistics
import sys
import threading
import time
from dataclasses import dataclass, field
from typing import Optional

from nmlite import security
from nmlite.manager import (AgentError, ConnectTimeout, InvalidOid, Manager,
                            ManagerError, RequestTimeout)
from nmlite.mib import parse_mib, write_raf

__all__ = ["main", "run_cli", "BenchCell", "BenchReport", "run_bench"]

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_CONNECTION = 2
EXIT_AGENT = 3

SYSTEM_OID_DEFAULT = "1.3.6.1.2.1.1.1.0"   # sysDescr.0
OTHER_OID_DEFAULT = "1.3.6.1.2.1.4.3.0"    # ipInReceives.0


class _Parser(argparse.ArgumentParser):
    """argparse that uses exit code 1 for usage errors (not 2)."""

    def exit(self, status=0, message=None):
        if message:
            self._print_message(message, sys.stderr)
        raise SystemExit(EXIT_USAGE if status else EXIT_OK)


def _build_parser() -> _Parser:
    parser = _Parser(prog="nm", description=__doc__.split("\n")[0])
    parser.add_argument("--transport", choices=["tcp", "udp"], default="tcp")
    parser.add_argument("--community", default="public")
    parser.add_argument("--secure", action="store_true",
                        help="sign requests; agent replies arrive encrypted")
    parser.add_argument("--key-file", help="decimal-text key file (n=, e=, d=)")
    parser.add_argument("--log-file", help="append operation log lines here")
    parser.add_argument("--udp-port", type=int,
                        help="agent UDP port (default: tcp port + 1)")
    parser.add_argument("--discovery-port", type=int, default=7772)
    parser.add_argument("--broadcast", default="255.255.255.255",
                        help="discovery broadcast address")

    sub = parser.add_subparsers(dest="command", required=True)

    mib = sub.add_parser("mib", help="MIB compiler")
    mib_sub = mib.add_subparsers(dest="mib_command", required=True)
    compile_p = mib_sub.add_parser("compile",
                                   help="compile MIB text into a record file")
    compile_p.add_argument("input")
    compile_p.add_argument("output")

    sub.add_parser("discover", help="broadcast a probe and list agents")

    for name in ("get", "getnext", "describe"):
        p = sub.add_parser(name)
        p.add_argument("agent", help="host[:tcp_port]")
        p.add_argument("oid")
    set_p = sub.add_parser("set")
    set_p.add_argument("agent")
    set_p.add_argument("oid")
    set_p.add_argument("value")
    walk_p = sub.add_parser("walk", help="iterated get-next to end of tree")
    walk_p.add_argument("agent")
    walk_p.add_argument("oid")
    levels_p = sub.add_parser("levels",
                              help="show the next and upper tree levels")
    levels_p.add_argument("agent")
    levels_p.add_argument("oid")

    poll_p = sub.add_parser("poll", help="poll an instance at a fixed period")
    poll_p.add_argument("agent")
    poll_p.add_argument("oid")
    poll_p.add_argument("--period", type=int, default=1000, metavar="MS")
    poll_p.add_argument("--count", type=int, default=10,
                        help="stop after this many samples")

    trap_p = sub.add_parser("trap", help="subscribe and print event reports")
    trap_p.add_argument("agent")
    trap_p.add_argument("oid")
    trap_p.add_argument("--threshold", type=float, required=True)
    trap_p.add_argument("--period", type=int, default=1000, metavar="MS")
    trap_p.add_argument("--listen-port", type=int, default=7773)
    trap_p.add_argument("--duration", type=float, default=30.0,
                        metavar="SECONDS")

    bench_p = sub.add_parser("bench", help="response-time benchmark")
    bench_p.add_argument("agent")
    bench_p.add_argument("--samples", type=int, default=30)
    bench_p.add_argument("--warmup", type=int, default=5)
    bench_p.add_argument("--system-oid", default=SYSTEM_OID_DEFAULT)
    bench_p.add_argument("--other-oid", default=OTHER_OID_DEFAULT)

    keygen_p = sub.add_parser("keygen", help="generate an RSA keypair")
    keygen_p.add_argument("--bits", type=int, default=1024,
                          choices=[512, 1024, 2048])
    keygen_p.add_argument("--seed", type=int,
                          help="deterministic generation (tests/demos)")
    keygen_p.add_argument("--out", required=True,
                          help="private key file (n, e, d)")
    keygen_p.add_argument("--public-out",
                          help="agent-side public key file (n, e)")
    return parser


def _split_agent(text: str) -> tuple[str, int]:
    host, _, port = text.partition(":")
    return host, int(port) if port else 7770


def _make_manager(args) -> Manager:
    key = security.load_key_file(args.key_file) if args.key_file else None
    return Manager(community=args.community, key=key,
                   discovery_port=args.discovery_port,
                   broadcast_address=args.broadcast,
                   log_path=args.log_file)


def _open(manager: Manager, args, transport: Optional[str] = None,
          secure: Optional[bool] = None):
    host, tcp_port = _split_agent(args.agent)
    return manager.open_session(
        (host, tcp_port),
        transport=transport if transport is not None else args.transport,
        security_enabled=args.secure if secure is None else secure,
        udp_port=args.udp_port)


# -- bench ----------------------------------------------------------------------

@dataclass
class BenchCell:
    request_type: str
    group: str
    secure: bool
    transport: str
    samples_us: list[int] = field(default_factory=list)
    available: bool = True

    @property
    def n(self) -> int:
        return len(self.samples_us)

    @property
    def mean_us(self) -> float:
        return statistics.fmean(self.samples_us) if self.samples_us else 0.0

    @property
    def median_us(self) -> float:
        return statistics.median(self.samples_us) if self.samples_us else 0.0

    @property
    def p95_us(self) -> float:
        if not self.samples_us:
            return 0.0
        ordered = sorted(self.samples_us)
        return float(ordered[int(0.95 * (len(ordered) - 1))])

    def machine_line(self) -> str:
        return "\t".join([
            "bench", self.request_type, self.group,
            "on" if self.secure else "off", self.transport, str(self.n),
            f"{self.mean_us:.1f}", f"{self.median_us:.1f}",
            f"{self.p95_us:.1f}"])


@dataclass
class BenchReport:
    cells: list[BenchCell]

    def cell(self, group: str, secure: bool, transport: str) -> BenchCell:
        for cell in self.cells:
            if (cell.group, cell.secure, cell.transport) == (group, secure,
                                                             transport):
                return cell
        raise KeyError((group, secure, transport))

    def machine_lines(self) -> list[str]:
        return [cell.machine_line() for cell in self.cells]

    def text_table(self) -> str:
        header = f"{'type':<6} {'group':<8} {'secure':<7} {'transport':<9} " \
                 f"{'n':>4} {'mean_us':>10} {'median_us':>10} {'p95_us':>10}"
        lines = [header, "-" * len(header)]
        for cell in self.cells:
            if not cell.available:
                lines.append(f"{cell.request_type:<6} {cell.group:<8} "
                             f"{'on' if cell.secure else 'off':<7} "
                             f"{cell.transport:<9} unavailable")
                continue
            lines.append(
                f"{cell.request_type:<6} {cell.group:<8} "
                f"{'on' if cell.secure else 'off':<7} {cell.transport:<9} "
                f"{cell.n:>4} {cell.mean_us:>10.1f} {cell.median_us:>10.1f} "
                f"{cell.p95_us:>10.1f}")
        return "\n".join(lines)


def run_bench(manager: Manager, agent: tuple[str, int],
              udp_port: Optional[int] = None, samples: int = 30,
              warmup: int = 5, system_oid: str = SYSTEM_OID_DEFAULT,
              other_oid: str = OTHER_OID_DEFAULT) -> BenchReport:
    """Response times measured at the manager end, per MIB group, with
    security on/off over both transports."""
    if samples < 30:
        samples = 30
    cells: list[BenchCell] = []
    for transport in ("tcp", "udp"):
        for secure in (False, True):
            for group, oid in (("system", system_oid), ("other", other_oid)):
                cell = BenchCell("get", group, secure, transport)
                cells.append(cell)
                try:
                    session = manager.open_session(
                        agent, transport=transport, security_enabled=secure,
                        udp_port=udp_port)
                except ManagerError:
                    cell.available = False
                    continue
                consecutive_timeouts = 0
                try:
                    for _ in range(warmup):
                        try:
                            session.get(oid)
                        except ManagerError:
                            pass
                    while cell.n < samples:
                        started = time.perf_counter()
                        try:
                            session.get(oid)
                        except (RequestTimeout, ConnectTimeout):
                            consecutive_timeouts += 1
                            if consecutive_timeouts >= 10:
                                cell.available = False
                                break
                            continue
                        except ManagerError:
                            cell.available = False
                            break
                        consecutive_timeouts = 0
                        cell.samples_us.append(
                            int((time.perf_counter() - started) * 1e6))
                finally:
                    session.close()
    return BenchReport(cells)


# -- subcommand bodies -------------------------------------------------------------

def _cmd_mib_compile(args) -> int:
    with open(args.input) as fh:
        records = parse_mib(fh.read())
    with open(args.output, "wb") as fh:
        written = write_raf(records, fh)
    print(f"compiled {len(records)} records ({written} bytes) "
          f"into {args.output}")
    return EXIT_OK


def _cmd_keygen(args) -> int:
    key = security.generate_keypair(args.bits, seed=args.seed)
    security.save_key_file(key, args.out, include_private=True)
    print(f"wrote private key ({args.bits} bits) to {args.out}")
    if args.public_out:
        security.save_key_file(key, args.public_out, include_private=False)
        print(f"wrote public part to {args.public_out}")
    return EXIT_OK


def _cmd_discover(args) -> int:
    manager = _make_manager(args)
    try:
        entries = manager.discover(timeout_ms=2000)
        if not entries:
            print("no agents answered")
            return EXIT_OK
        print(f"{'host':<20} {'tcp':>6} {'udp':>6}")
        for entry in entries:
            print(f"{entry.host:<20} {entry.tcp_port:>6} {entry.udp_port:>6}")
        return EXIT_OK
    finally:
        manager.close()


def _cmd_request(args) -> int:
    manager = _make_manager(args)
    session = None
    try:
        session = _open(manager, args)
        if args.command == "get":
            instance, value = session.get(args.oid)
            print(f"{instance} = {value}")
        elif args.command == "getnext":
            instance, value = session.get_next(args.oid)
            print(f"{instance} = {value}")
        elif args.command == "set":
            instance, value = session.set(args.oid, args.value)
            print(f"{instance} = {value}")
        elif args.command == "describe":
            result = session.describe(args.oid)
            print(f"Object Name: {result.name}")
            print(f"Syntax:      {result.syntax}")
            print(f"Access:      {result.access}")
            print(f"Status:      {result.status}")
            print(f"Description: {result.description}")
        elif args.command == "walk":
            for instance, value in session.walk(args.oid):
                print(f"{instance} = {value}")
        elif args.command == "levels":
            print("next level:")
            for name, identifier in session.next_level(args.oid):
                print(f"  {identifier:>4}  {name}")
            print("upper level:")
            for name, identifier in session.upper_level(args.oid):
                print(f"  {identifier:>4}  {name}")
        return EXIT_OK
    finally:
        if session is not None:
            session.release()
        manager.close()


def _cmd_poll(args) -> int:
    manager = _make_manager(args)
    session = None
    try:
        session = _open(manager, args)
        remaining = [args.count]
        done = threading.Event()

        def sink(timestamp, instance, value):
            print(f"{timestamp:.3f} {instance} = {value}", flush=True)
            remaining[0] -= 1
            if remaining[0] <= 0:
                done.set()

        task = manager.start_poll(session, args.oid, args.period, sink)
        done.wait(timeout=args.period / 1000.0 * (args.count + 2))
        task.stop()
        return EXIT_OK
    finally:
        if session is not None:
            session.release()
        manager.close()


def _cmd_trap(args) -> int:
    manager = _make_manager(args)
    session = None
    try:
        session = _open(manager, args)

        def sink(event):
            print(f"event: {event.instance} = {event.value} "
                  f"(threshold {event.threshold}) at {event.timestamp_ms}",
                  flush=True)

        manager.subscribe_trap(session, args.oid, args.threshold,
                               args.period, args.listen_port, sink)
        print(f"subscribed; listening {args.duration:.0f} s "
              f"on UDP {args.listen_port}", flush=True)
        time.sleep(args.duration)
        return EXIT_OK
    finally:
        if session is not None:
            session.release()
        manager.close()


def _cmd_bench(args) -> int:
    manager = _make_manager(args)
    try:
        report = run_bench(manager, _split_agent(args.agent),
                           udp_port=args.udp_port, samples=args.samples,
                           warmup=args.warmup, system_oid=args.system_oid,
                           other_oid=args.other_oid)
        print(report.text_table())
        for line in report.machine_lines():
            print(line)
        if all(not cell.available for cell in report.cells):
            return EXIT_AGENT
        return EXIT_OK
    finally:
        manager.close()


def run_cli(argv: Optional[list[str]] = None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "mib":
            return _cmd_mib_compile(args)
        if args.command == "keygen":
            return _cmd_keygen(args)
        if args.command == "discover":
            return _cmd_discover(args)
        if args.command in ("get", "getnext", "set", "describe", "walk",
                            "levels"):
            return _cmd_request(args)
        if args.command == "poll":
            return _cmd_poll(args)
        if args.command == "trap":
            return _cmd_trap(args)
        if args.command == "bench":
            return _cmd_bench(args)
        parser.error(f"unknown command {args.command}")
    except InvalidOid as exc:
        print(f"nm: invalid OID: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (ConnectTimeout, RequestTimeout) as exc:
        print(f"nm: connection failed: {exc}", file=sys.stderr)
        return EXIT_CONNECTION
    except AgentError as exc:
        print(f"nm: agent error: {exc}", file=sys.stderr)
        return EXIT_AGENT
    except OSError as exc:
        print(f"nm: {exc}", file=sys.stderr)
        return EXIT_CONNECTION
    return EXIT_USAGE


def main(argv: Optional[list[str]] = None) -> int:
    try:
        return run_cli(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else EXIT_USAGE


if __name__ == "__main__":  # pragma: no cover
    raise SystemExit(main())
