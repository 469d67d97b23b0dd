"""Agent engine: authentication, dispatch, traps, lifecycle errors."""

import io
import socket
import struct
import time

import pytest

from nmlite import security, wire
from nmlite.agent import (Agent, AgentConfig, AgentStartupError,
                          EXIT_BAD_KEY, EXIT_BAD_RAF, EXIT_PORT_IN_USE,
                          RequestHandler, TrapSubscription,
                          authenticate_request, load_config,
                          trap_monitor_tick)
from nmlite.device import SimulatedDevice
from nmlite.mib.raf import RafReader
from nmlite.mib.tree import build_tree
from nmlite.wire import MessageType, make_message

from conftest import DEVICE_STATE, free_port_block, make_agent


@pytest.fixture()
def handler(mib2_raf_bytes, manager_key):
    reader = RafReader(io.BytesIO(mib2_raf_bytes))
    tree = build_tree(RafReader(io.BytesIO(mib2_raf_bytes)))
    provider = SimulatedDevice.from_text(DEVICE_STATE)
    return RequestHandler(tree, reader, provider,
                          manager_key.public_only(), "public")


def config_for(handler_config=None, **overrides):
    values = dict(raf_path="unused", tcp_port=1, udp_port=2,
                  discovery_port=3, community="public")
    values.update(overrides)
    return AgentConfig(**values)


class TestAuthenticate:
    def test_good_community_unsigned(self, manager_key):
        message = make_message(MessageType.GET, ["public", "1.3"])
        ok, reason = authenticate_request(message, config_for(), False,
                                          manager_key.public_only())
        assert ok and reason == ""

    def test_wrong_community(self, manager_key):
        message = make_message(MessageType.GET, ["private", "1.3"])
        ok, reason = authenticate_request(message, config_for(), False,
                                          manager_key.public_only())
        assert not ok and reason == "community"

    def test_signature_required_when_security_on(self, manager_key):
        message = make_message(MessageType.GET, ["public", "1.3"])
        ok, reason = authenticate_request(message, config_for(), True,
                                          manager_key.public_only())
        assert not ok and reason == "signature"

    def test_valid_signature_accepted(self, manager_key):
        message = security.sign_message(
            make_message(MessageType.GET, ["public", "1.3"]), manager_key)
        ok, _ = authenticate_request(message, config_for(), True,
                                     manager_key.public_only())
        assert ok

    def test_corrupted_signature_denied(self, manager_key):
        message = security.sign_message(
            make_message(MessageType.GET, ["public", "1.3"]), manager_key)
        corrupted = bytearray(message.fields[-1])
        corrupted[0] ^= 0x42
        message.fields[-1] = bytes(corrupted)
        ok, reason = authenticate_request(message, config_for(), True,
                                          manager_key.public_only())
        assert not ok and reason == "signature"

    def test_community_checked_before_signature(self, manager_key):
        message = security.sign_message(
            make_message(MessageType.GET, ["wrong", "1.3"]), manager_key)
        ok, reason = authenticate_request(message, config_for(), True,
                                          manager_key.public_only())
        assert not ok and reason == "community"


class ScriptedProvider:
    """Replays a fixed sample sequence for trap-tick tests."""

    def __init__(self, samples):
        self.samples = list(samples)
        self.position = 0

    def read(self, instance):
        value = self.samples[min(self.position, len(self.samples) - 1)]
        self.position += 1
        if isinstance(value, Exception):
            raise value
        return value

    def write(self, instance, value):
        raise NotImplementedError

    def instances(self):
        return ["1.2.3.0"]


class TestTrapTick:
    def run_sequence(self, samples, threshold):
        provider = ScriptedProvider(samples)
        sub = TrapSubscription(instance="1.2.3.0", threshold=threshold,
                               period_ms=100, report_address=("h", 1))
        fired = []
        now = 0.0
        for _ in samples:
            fired.extend(trap_monitor_tick([sub], provider, now))
            now += 0.1
        return [float(m.field_str(1)) for _addr, m in fired]

    def test_edge_rule_hand_trace(self):
        # 5, 12, 13, 4, 11 against threshold 10: fire at 12 and second 11
        assert self.run_sequence([5, 12, 13, 4, 11], 10) == [12, 11]

    def test_constant_below_threshold(self):
        assert self.run_sequence([3, 3, 3, 3], 10) == []

    def test_strictly_greater(self):
        assert self.run_sequence([10, 10], 10) == []

    def test_not_due_not_sampled(self):
        provider = ScriptedProvider([50])
        sub = TrapSubscription(instance="1.2.3.0", threshold=1,
                               period_ms=1000, report_address=("h", 1))
        first = trap_monitor_tick([sub], provider, 0.0)
        again = trap_monitor_tick([sub], provider, 0.5)  # not due yet
        assert len(first) == 1 and again == []

    def test_read_failures_counted_not_reported(self):
        provider = ScriptedProvider([RuntimeError("gone")])
        sub = TrapSubscription(instance="1.2.3.0", threshold=1,
                               period_ms=100, report_address=("h", 1))
        stats = {}
        assert trap_monitor_tick([sub], provider, 0.0, stats) == []
        assert stats["trap_read_failures"] == 1

    def test_report_fields(self):
        provider = ScriptedProvider([99])
        sub = TrapSubscription(instance="1.2.3.0", threshold=10,
                               period_ms=100, report_address=("host", 9))
        ((address, message),) = trap_monitor_tick([sub], provider, 0.0)
        assert address == ("host", 9)
        assert message.type == MessageType.EVENT_REPORT
        assert message.field_str(0) == "1.2.3.0"
        assert message.field_str(1) == "99"
        assert message.field_str(2) == "10"
        int(message.field_str(3))  # timestamp parses


class TestDispatch:
    def ok(self, handler, mtype, *fields):
        reply = handler.handle(make_message(mtype, ["public", *fields],
                                            correlation_id=5))
        assert reply.correlation_id == 5
        assert reply.type == MessageType.RESPONSE, reply.fields
        return reply

    def err(self, handler, mtype, *fields):
        reply = handler.handle(make_message(mtype, ["public", *fields]))
        assert reply.type == MessageType.ERROR_RESPONSE
        return reply.field_str(0)

    def test_initialise(self, handler):
        reply = self.ok(handler, MessageType.INITIALISE)
        assert wire.parse_level(reply.fields[0]) == [("iso", 1)]

    def test_get_fixture_value(self, handler):
        reply = self.ok(handler, MessageType.GET, "1.3.6.1.2.1.1.1.0")
        assert reply.field_str(1) == "lab-sim router"

    def test_get_unknown_oid(self, handler):
        assert self.err(handler, MessageType.GET,
                        "1.3.6.1.2.1.77.1.0") == wire.ERR_NO_SUCH_OBJECT

    def test_get_object_without_instance(self, handler):
        assert self.err(handler, MessageType.GET,
                        "1.3.6.1.2.1.1.1") == wire.ERR_NO_SUCH_INSTANCE

    def test_describe_matches_raf_record(self, handler):
        reply = self.ok(handler, MessageType.DESCRIBE, "ifType")
        node = handler.tree.resolve("ifType")
        record = handler.reader.read_record(node.raf_index)
        assert [f.decode() for f in reply.fields] == [
            record.name, record.syntax, record.access, record.status,
            record.description]

    def test_describe_skeleton_node(self, handler):
        assert self.err(handler, MessageType.DESCRIBE,
                        "iso") == wire.ERR_NO_SUCH_OBJECT

    def test_set_read_write_echoes(self, handler):
        reply = self.ok(handler, MessageType.SET, "1.3.6.1.2.1.1.5.0",
                        "newname")
        assert reply.field_str(1) == "newname"
        assert handler.provider.read("1.3.6.1.2.1.1.5.0") == "newname"

    def test_set_read_only_not_writable(self, handler):
        assert self.err(handler, MessageType.SET, "1.3.6.1.2.1.1.1.0",
                        "x") == wire.ERR_NOT_WRITABLE

    def test_set_bad_type_is_bad_request(self, handler):
        # ifAdminStatus is read-write INTEGER; give it text
        handler.provider._entries["1.3.6.1.2.1.2.2.1.7.1"] = \
            __import__("nmlite.device", fromlist=["_Entry"])._Entry(
                type="INTEGER", base=1)
        assert self.err(handler, MessageType.SET, "1.3.6.1.2.1.2.2.1.7.1",
                        "up") == wire.ERR_BAD_REQUEST

    def test_get_next_walks_instances_then_objects(self, handler):
        # from the ifType object: its first instance
        reply = self.ok(handler, MessageType.GET_NEXT, "1.3.6.1.2.1.2.2.1.3")
        assert reply.field_str(0) == "1.3.6.1.2.1.2.2.1.3.1"
        # from that instance: next column with an instance
        reply = self.ok(handler, MessageType.GET_NEXT,
                        "1.3.6.1.2.1.2.2.1.3.1")
        assert reply.field_str(0) == "1.3.6.1.2.1.2.2.1.10.1"

    def test_get_next_end_of_mib(self, handler):
        assert self.err(handler, MessageType.GET_NEXT,
                        "1.3.6.1.2.1.7.1.0") == wire.ERR_END_OF_MIB

    def test_levels(self, handler):
        reply = self.ok(handler, MessageType.NEXT_LEVEL, "1.3.6.1.2.1")
        assert wire.parse_level(reply.fields[0])[:2] == [("system", 1),
                                                         ("interfaces", 2)]
        reply = self.ok(handler, MessageType.UPPER_LEVEL, "1.3.6.1.2.1.1")
        assert wire.parse_level(reply.fields[0]) == [("mib-2", 1)]

    def test_subscribe_validation(self, handler):
        assert self.err(handler, MessageType.SUBSCRIBE_TRAP,
                        "1.3.6.1.2.1.1.1.0", "10", "500", "", "9999"
                        ) == wire.ERR_BAD_REQUEST  # non-numeric object
        assert self.err(handler, MessageType.SUBSCRIBE_TRAP,
                        "1.3.6.1.2.1.4.3.0", "10", "50", "", "9999"
                        ) == wire.ERR_BAD_REQUEST  # period too small
        self.ok(handler, MessageType.SUBSCRIBE_TRAP,
                "1.3.6.1.2.1.4.3.0", "10", "500", "", "9999")
        assert len(handler.subscriptions) == 1

    def test_signed_get_reply_is_encrypted(self, handler, manager_key):
        request = security.sign_message(
            make_message(MessageType.GET, ["public", "1.3.6.1.2.1.1.1.0"],
                         correlation_id=9), manager_key)
        reply = handler.handle(request)
        assert reply.encrypted
        plain = security.decrypt(reply.fields[1], manager_key)
        assert plain == b"lab-sim router"

    def test_describe_reply_not_encrypted(self, handler, manager_key):
        request = security.sign_message(
            make_message(MessageType.DESCRIBE, ["public", "sysDescr"]),
            manager_key)
        reply = handler.handle(request)
        assert not reply.encrypted


class TestConfig:
    def test_load_round_trip(self, tmp_path):
        path = tmp_path / "agent.conf"
        path.write_text(
            "raf = /tmp/x.raf\n"
            "device_state = /tmp/dev.txt\n"
            "tcp_port = 9101   # comment\n"
            "udp_port = 9102\n"
            "discovery_port = 9103\n"
            "community = secret\n"
            "security = on\n"
            "announce = broadcast, 10.0.0.1:7772\n")
        config = load_config(str(path))
        assert config.tcp_port == 9101
        assert config.security is True
        assert config.announce == ["broadcast", "10.0.0.1:7772"]
        assert config.community == "secret"

    def test_unknown_key_rejected(self, tmp_path):
        path = tmp_path / "agent.conf"
        path.write_text("raf = x\nbogus = 1\n")
        with pytest.raises(ValueError):
            load_config(str(path))

    def test_ports_must_differ(self):
        with pytest.raises(ValueError):
            AgentConfig(raf_path="x", tcp_port=5, udp_port=5,
                        discovery_port=6)

    def test_community_non_empty(self):
        with pytest.raises(ValueError):
            AgentConfig(raf_path="x", community="")


class TestStartupFailures:
    def test_bad_raf_exit_code(self, tmp_path):
        bad = tmp_path / "broken.raf"
        bad.write_bytes(b"not a record file")
        agent = Agent(AgentConfig(raf_path=str(bad)))
        with pytest.raises(AgentStartupError) as excinfo:
            agent.start()
        assert excinfo.value.exit_code == EXIT_BAD_RAF

    def test_port_in_use_exit_code(self, raf_path, device_path):
        blocker = socket.socket()
        blocker.bind(("127.0.0.1", 0))
        port = blocker.getsockname()[1]
        ports = free_port_block(3)
        agent = Agent(AgentConfig(raf_path=raf_path,
                                  device_state_path=device_path,
                                  tcp_port=port, udp_port=ports[1],
                                  discovery_port=ports[2]))
        try:
            with pytest.raises(AgentStartupError) as excinfo:
                agent.start()
            assert excinfo.value.exit_code == EXIT_PORT_IN_USE
        finally:
            blocker.close()

    def test_bad_key_exit_code(self, raf_path, device_path, tmp_path):
        bad = tmp_path / "bad.key"
        bad.write_text("gibberish\n")
        agent = Agent(AgentConfig(raf_path=raf_path,
                                  device_state_path=device_path,
                                  key_file=str(bad),
                                  tcp_port=free_port_block(1)[0]))
        with pytest.raises(AgentStartupError) as excinfo:
            agent.start()
        assert excinfo.value.exit_code == EXIT_BAD_KEY


class TestBusyLimit:
    def test_connection_beyond_limit_gets_busy(self, raf_path, device_path,
                                               agent_key_path):
        agent = make_agent(raf_path, device_path, agent_key_path,
                           max_sessions=0)
        try:
            with socket.create_connection(
                    ("127.0.0.1", agent.config.tcp_port), timeout=2) as conn:
                stream = conn.makefile("rb")
                payload = wire.read_frame(stream)
                reply = wire.decode_message(payload)
                assert reply.type == MessageType.ERROR_RESPONSE
                assert reply.field_str(0) == wire.ERR_BUSY
        finally:
            agent.stop()
