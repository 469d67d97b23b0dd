"""Shared scaffolding for the demo scripts: compile the bundled MIB-II,
write a simulated device state, generate keys, and start an agent on
loopback ports."""

import atexit
import os
import tempfile

from nmlite import security
from nmlite.agent import Agent, AgentConfig
from nmlite.mib import mib2_text, parse_mib, write_raf

LOOPBACK_BCAST = "127.255.255.255"

DEVICE_STATE = """\
1.3.6.1.2.1.1.1.0 = STRING : demo-lab router, software rev 4.2
1.3.6.1.2.1.1.3.0 = TIMETICKS : 0 ramp(100)
1.3.6.1.2.1.1.4.0 = STRING : noc@example.net
1.3.6.1.2.1.1.5.0 = STRING : demo-router
1.3.6.1.2.1.1.6.0 = STRING : lab shelf 3
1.3.6.1.2.1.2.2.1.3.1 = INTEGER : 6
1.3.6.1.2.1.2.2.1.10.1 = COUNTER : 0 ramp(250)
1.3.6.1.2.1.4.3.0 = COUNTER : 100 ramp(40)
1.3.6.1.2.1.7.1.0 = COUNTER : 17
"""


def build_lab(base_port: int, security_required: bool = False):
    """Returns (agent, manager_key, workdir).  The agent is already running
    on (base_port, base_port+1) with discovery on base_port+2."""
    workdir = tempfile.mkdtemp(prefix="nmlite-demo-")

    raf_path = os.path.join(workdir, "mib2.raf")
    records = parse_mib(mib2_text())
    with open(raf_path, "wb") as fh:
        write_raf(records, fh)

    device_path = os.path.join(workdir, "device.txt")
    with open(device_path, "w") as fh:
        fh.write(DEVICE_STATE)

    key = security.generate_keypair(512, seed=12345)
    agent_key_path = os.path.join(workdir, "agent.key")
    security.save_key_file(key, agent_key_path, include_private=False)

    config = AgentConfig(
        raf_path=raf_path, device_state_path=device_path,
        tcp_port=base_port, udp_port=base_port + 1,
        discovery_port=base_port + 2, key_file=agent_key_path,
        security=security_required, announce=["broadcast"],
        broadcast_address=LOOPBACK_BCAST)
    agent = Agent(config)
    agent.start()
    atexit.register(agent.stop)
    return agent, key, workdir
