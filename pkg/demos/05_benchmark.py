"""Response-time measurement at the manager end.

GET requests against a system-group object and a non-system object, with
security off and on, over TCP and UDP; each cell is averaged over 30
samples after 5 warm-ups.  Expect the secured cells to sit above the
plain ones: that is the cost of the signing and encryption arithmetic.
"""

import time

from _lab import LOOPBACK_BCAST, build_lab
from nmlite.cli import run_bench
from nmlite.manager import Manager

agent, key, workdir = build_lab(base_port=27870)
time.sleep(0.2)
manager = Manager(key=key, discovery_port=agent.config.discovery_port,
                  broadcast_address=LOOPBACK_BCAST)

print("running the 8-cell request matrix (this takes a few seconds)...\n")
report = run_bench(manager, ("127.0.0.1", agent.config.tcp_port),
                   udp_port=agent.config.udp_port, samples=30)

print(report.text_table())
print()
for transport in ("tcp", "udp"):
    for group in ("system", "other"):
        plain = report.cell(group, False, transport)
        secure = report.cell(group, True, transport)
        overhead = secure.mean_us - plain.mean_us
        print(f"{transport}/{group:<7}: security adds {overhead:8.0f} us "
              f"per request ({secure.mean_us / plain.mean_us:4.1f}x)")

print("\nmachine-readable lines:")
for line in report.machine_lines():
    print(line)

manager.close()
