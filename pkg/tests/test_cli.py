"""CLI behaviour: exit codes, output shapes, compiler and keygen."""

import io

import pytest

from nmlite.cli import run_cli, main
from nmlite.mib.raf import RafReader
from nmlite.mib import mib2_text
from nmlite import security

from conftest import agent_entry, free_port_block


def invoke(capsys, *argv):
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def agent_arg(agent):
    host, tcp, _udp = agent_entry(agent)
    return f"{host}:{tcp}"


def udp_flags(agent):
    return ["--udp-port", str(agent.config.udp_port)]


class TestUsage:
    def test_no_arguments_exits_one_with_usage(self, capsys):
        code, _out, err = invoke(capsys)
        assert code == 1
        assert "usage" in err.lower()

    def test_unknown_command(self, capsys):
        code, _out, _err = invoke(capsys, "frobnicate")
        assert code == 1

    def test_help_exits_zero(self, capsys):
        code, out, _err = invoke(capsys, "--help")
        assert code == 0
        assert "bench" in out


class TestMibCompile:
    def test_compile_bundled_mib(self, tmp_path, capsys):
        source = tmp_path / "mib.txt"
        source.write_text(mib2_text())
        out = tmp_path / "mib.raf"
        code, stdout, _ = invoke(capsys, "mib", "compile", str(source),
                                 str(out))
        assert code == 0
        assert "201 records" in stdout
        with open(out, "rb") as fh:
            assert RafReader(fh).record_count == 201


class TestKeygen:
    def test_writes_loadable_keys(self, tmp_path, capsys):
        priv = tmp_path / "m.key"
        pub = tmp_path / "a.key"
        code, _out, _err = invoke(capsys, "keygen", "--bits", "512",
                                  "--seed", "5", "--out", str(priv),
                                  "--public-out", str(pub))
        assert code == 0
        loaded = security.load_key_file(str(priv))
        assert loaded.has_private
        public = security.load_key_file(str(pub))
        assert public.d is None and public.n == loaded.n
        again = tmp_path / "again.key"
        invoke(capsys, "keygen", "--bits", "512", "--seed", "5",
               "--out", str(again))
        assert security.load_key_file(str(again)).n == loaded.n


class TestRequests:
    def test_get_prints_value(self, live_agent, capsys):
        code, out, _ = invoke(capsys, "get", agent_arg(live_agent),
                              "sysDescr.0")
        assert code == 0
        assert "lab-sim router" in out

    def test_get_over_udp(self, live_agent, capsys):
        code, out, _ = invoke(capsys, "--transport", "udp",
                              *udp_flags(live_agent),
                              "get", agent_arg(live_agent), "sysDescr.0")
        assert code == 0
        assert "lab-sim router" in out

    def test_describe_five_labeled_lines(self, live_agent, capsys):
        code, out, _ = invoke(capsys, "describe", agent_arg(live_agent),
                              "ifType")
        assert code == 0
        for label in ("Object Name:", "Syntax:", "Access:", "Status:",
                      "Description:"):
            assert label in out
        assert "read-only" in out
        assert "mandatory" in out

    def test_set_then_get(self, live_agent, capsys):
        code, out, _ = invoke(capsys, "set", agent_arg(live_agent),
                              "sysName.0", "edge-router-9")
        assert code == 0 and "edge-router-9" in out
        _code, out, _ = invoke(capsys, "get", agent_arg(live_agent),
                               "sysName.0")
        assert "edge-router-9" in out

    def test_walk_lists_instances(self, live_agent, capsys):
        code, out, _ = invoke(capsys, "walk", agent_arg(live_agent),
                              "system")
        assert code == 0
        assert "1.3.6.1.2.1.1.1.0" in out
        assert out.count("=") >= 4

    def test_levels(self, live_agent, capsys):
        code, out, _ = invoke(capsys, "levels", agent_arg(live_agent),
                              "mib-2")
        assert code == 0
        assert "next level:" in out and "upper level:" in out
        assert "system" in out

    def test_secure_flag(self, live_agent, manager_key, tmp_path, capsys):
        key_path = tmp_path / "m.key"
        security.save_key_file(manager_key, str(key_path))
        code, out, _ = invoke(capsys, "--secure", "--key-file",
                              str(key_path), "get", agent_arg(live_agent),
                              "sysDescr.0")
        assert code == 0
        assert "lab-sim router" in out

    def test_poll_collects_samples(self, live_agent, capsys):
        code, out, _ = invoke(capsys, "poll", agent_arg(live_agent),
                              "sysUpTime.0", "--period", "150",
                              "--count", "3")
        assert code == 0
        assert out.count("1.3.6.1.2.1.1.3.0") >= 3


class TestExitCodes:
    def test_connection_error_is_two(self, capsys):
        port = free_port_block(1)[0]
        code, _out, err = invoke(capsys, "get", f"127.0.0.1:{port}",
                                 "sysDescr.0")
        assert code == 2
        assert "connection" in err.lower()

    def test_agent_error_is_three(self, live_agent, capsys):
        code, _out, err = invoke(capsys, "get", agent_arg(live_agent),
                                 "1.3.6.1.2.1.123.0")
        assert code == 3
        assert "NoSuchObject" in err

    def test_invalid_oid_is_usage(self, live_agent, capsys):
        code, _out, err = invoke(capsys, "get", agent_arg(live_agent),
                                 "1..3")
        assert code == 1
        assert "invalid OID" in err

    def test_log_file_flag(self, live_agent, tmp_path, capsys):
        log = tmp_path / "cli.log"
        invoke(capsys, "--log-file", str(log), "get",
               agent_arg(live_agent), "sysDescr.0")
        lines = log.read_text().strip().split("\n")
        assert len(lines) == 3  # initialise, get, release
        assert any("\tGET\t" in line for line in lines)
