"""Runtime polling with an adjustable period, and threshold traps.

The agent samples subscribed instances itself at each subscription's
period and sends an event report over UDP exactly when a value crosses
its threshold upward (edge-triggered: no report storms while the value
stays high).
"""

import time

from _lab import LOOPBACK_BCAST, build_lab
from nmlite.manager import Manager

agent, key, workdir = build_lab(base_port=27850)
time.sleep(0.2)
manager = Manager(key=key, discovery_port=agent.config.discovery_port,
                  broadcast_address=LOOPBACK_BCAST)
session = manager.open_session(("127.0.0.1", agent.config.tcp_port))

print("polling sysUpTime.0 every 200 ms, then slowing to 600 ms...")
stamps = []


def poll_sink(timestamp, instance, value):
    stamps.append(timestamp)
    print(f"   sample {len(stamps):>2}: {instance} = {value}")


task = manager.start_poll(session, "sysUpTime.0", 200, poll_sink)
time.sleep(1.0)
task.set_period(600)
print("   (period changed to 600 ms at runtime)")
time.sleep(1.3)
task.stop()

gaps = [f"{b - a:.2f}s" for a, b in zip(stamps, stamps[1:])]
print(f"inter-sample gaps: {gaps}\n")

print("subscribing a trap: ifInOctets.1 ramps 250/s, threshold 900")
events = []
manager.subscribe_trap(session, "1.3.6.1.2.1.2.2.1.10.1", threshold=900,
                       period_ms=300, report_port=27859,
                       sink=lambda event: events.append(event))

deadline = time.monotonic() + 6.0
while not events and time.monotonic() < deadline:
    time.sleep(0.05)

for event in events:
    print(f"   event report: {event.instance} = {event.value} "
          f"(threshold {event.threshold})")
print(f"exactly {len(events)} report(s): the counter crossed upward once "
      f"and stayed above")

session.release()
manager.close()
