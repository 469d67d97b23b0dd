"""Shared fixtures: compiled MIB-II, simulated devices, live agents."""

import io
import os
import socket
import sys
import threading
import time

import pytest


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    """One visible PASS/FAIL line per acceptance criterion."""
    outcome = yield
    report = outcome.get_result()
    if report.when == "call" and "test_acceptance" in item.nodeid:
        verdict = "PASS" if report.passed else "FAIL"
        print(f"ACCEPTANCE {item.name}: {verdict}",
              file=sys.__stdout__, flush=True)

from nmlite import security
from nmlite.agent import Agent, AgentConfig
from nmlite.manager import Manager
from nmlite.mib import RafReader, build_tree, mib2_text, parse_mib, write_raf

LOOPBACK_BCAST = "127.255.255.255"

DEVICE_STATE = """\
# simulated lab device
1.3.6.1.2.1.1.1.0 = STRING : lab-sim router
1.3.6.1.2.1.1.3.0 = TIMETICKS : 0 ramp(100)
1.3.6.1.2.1.1.4.0 = STRING : ops@example.net
1.3.6.1.2.1.1.5.0 = STRING : sim-host
1.3.6.1.2.1.1.6.0 = STRING : rack 12
1.3.6.1.2.1.2.2.1.3.1 = INTEGER : 6
1.3.6.1.2.1.2.2.1.10.1 = COUNTER : 1000 ramp(50)
1.3.6.1.2.1.4.3.0 = COUNTER : 500 ramp(25)
1.3.6.1.2.1.7.1.0 = COUNTER : 42
"""

_PORT_COUNTER = [0]
_PORT_LOCK = threading.Lock()


def free_port_block(count: int = 3) -> list[int]:
    """Hand out a block of ports unlikely to collide between tests."""
    with _PORT_LOCK:
        base = 20000 + (os.getpid() % 500) * 60 + _PORT_COUNTER[0]
        _PORT_COUNTER[0] += count
    return [base + i for i in range(count)]


@pytest.fixture(scope="session")
def mib2_records():
    return parse_mib(mib2_text())


@pytest.fixture(scope="session")
def mib2_raf_bytes(mib2_records):
    buf = io.BytesIO()
    write_raf(mib2_records, buf)
    return buf.getvalue()


@pytest.fixture()
def mib2_reader(mib2_raf_bytes):
    return RafReader(io.BytesIO(mib2_raf_bytes))


@pytest.fixture()
def mib2_tree(mib2_raf_bytes):
    return build_tree(io.BytesIO(mib2_raf_bytes))


@pytest.fixture(scope="session")
def manager_key():
    return security.generate_keypair(512, seed=20260808)


@pytest.fixture(scope="session")
def raf_path(tmp_path_factory, mib2_records):
    path = tmp_path_factory.mktemp("raf") / "mib2.raf"
    with open(path, "wb") as fh:
        write_raf(mib2_records, fh)
    return str(path)


@pytest.fixture()
def device_path(tmp_path):
    path = tmp_path / "device.txt"
    path.write_text(DEVICE_STATE)
    return str(path)


@pytest.fixture(scope="session")
def agent_key_path(tmp_path_factory, manager_key):
    path = tmp_path_factory.mktemp("keys") / "agent.key"
    security.save_key_file(manager_key, str(path), include_private=False)
    return str(path)


def make_agent(raf_path, device_path, key_path, ports=None, community="public",
               security_required=False, announce=("broadcast",),
               max_sessions=32, device_text=None, tmp_path=None):
    if ports is None:
        ports = free_port_block(3)
    if device_text is not None:
        assert tmp_path is not None
        device_path = str(tmp_path / f"device-{ports[0]}.txt")
        with open(device_path, "w") as fh:
            fh.write(device_text)
    config = AgentConfig(
        raf_path=raf_path, device_state_path=device_path,
        tcp_port=ports[0], udp_port=ports[1], discovery_port=ports[2],
        community=community, key_file=key_path,
        security=security_required, announce=list(announce),
        broadcast_address=LOOPBACK_BCAST, max_sessions=max_sessions)
    agent = Agent(config)
    agent.start()
    return agent


@pytest.fixture()
def live_agent(raf_path, device_path, agent_key_path):
    agent = make_agent(raf_path, device_path, agent_key_path)
    time.sleep(0.05)
    yield agent
    agent.stop()


@pytest.fixture()
def live_manager(live_agent, manager_key):
    manager = Manager(key=manager_key,
                      discovery_port=live_agent.config.discovery_port,
                      broadcast_address=LOOPBACK_BCAST)
    yield manager
    manager.close()


def agent_entry(agent):
    """(host, tcp_port, udp_port) triple for opening sessions directly."""
    return agent.config.host, agent.config.tcp_port, agent.config.udp_port


class TcpTap:
    """A recording TCP proxy: the manager connects here, bytes flow to the
    real agent, and both directions land in ``captured``."""

    def __init__(self, target_host: str, target_port: int):
        self.target = (target_host, target_port)
        self.captured = bytearray()
        self._lock = threading.Lock()
        self._listener = socket.socket(socket.AF_INET, socket.SOCK_STREAM)
        self._listener.setsockopt(socket.SOL_SOCKET, socket.SO_REUSEADDR, 1)
        self._listener.bind(("127.0.0.1", 0))
        self._listener.listen(4)
        self._listener.settimeout(0.2)
        self.port = self._listener.getsockname()[1]
        self._stop = threading.Event()
        self._thread = threading.Thread(target=self._accept_loop, daemon=True)
        self._thread.start()

    def _accept_loop(self):
        while not self._stop.is_set():
            try:
                client, _ = self._listener.accept()
            except socket.timeout:
                continue
            except OSError:
                break
            upstream = socket.create_connection(self.target, timeout=5)
            for a, b in ((client, upstream), (upstream, client)):
                threading.Thread(target=self._pump, args=(a, b),
                                 daemon=True).start()

    def _pump(self, src, dst):
        try:
            while True:
                data = src.recv(4096)
                if not data:
                    break
                with self._lock:
                    self.captured += data
                dst.sendall(data)
        except OSError:
            pass
        finally:
            try:
                dst.shutdown(socket.SHUT_WR)
            except OSError:
                pass

    def bytes_seen(self) -> bytes:
        with self._lock:
            return bytes(self.captured)

    def close(self):
        self._stop.set()
        self._listener.close()
