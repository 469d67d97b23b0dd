"""Start an agent on loopback, discover it with a broadcast probe, then
drive every request type a browsing operator would: walk down the tree
level by level, read and write values, and fetch an object's description.
"""

import time

from _lab import LOOPBACK_BCAST, build_lab
from nmlite.manager import Manager

agent, key, workdir = build_lab(base_port=27810)
print(f"agent running: tcp {agent.config.tcp_port}, "
      f"udp {agent.config.udp_port}, discovery {agent.config.discovery_port}")
time.sleep(0.2)

manager = Manager(key=key, discovery_port=agent.config.discovery_port,
                  broadcast_address=LOOPBACK_BCAST)
entries = manager.discover(timeout_ms=1000)
print(f"discovery found: {[e.label() for e in entries]}\n")

session = manager.open_session(entries[0])
print(f"initialise returned the first tree level: {session.root_level}")

print("\ndescending: iso -> ... -> mib-2")
path = "1.3.6.1.2.1"
for name, identifier in session.next_level(path):
    print(f"   {identifier:>3}  {name}")

print("\nupper level from system (grandparent's children):",
      session.upper_level("1.3.6.1.2.1.1"))

print("\nget sysDescr.0      ->", session.get("sysDescr.0")[1])
print("get-next system     ->", session.get_next("system"))
print("set sysContact.0    ->", session.set("sysContact.0", "oncall@example.net")[1])

described = session.describe("ifType")
print("\ndescribe ifType:")
print(f"   name:        {described.name}")
print(f"   syntax:      {described.syntax[:50]}...")
print(f"   access:      {described.access}")
print(f"   status:      {described.status}")
print(f"   description: {described.description[:60]}...")

print("\nwalking the system group:")
for instance, value in session.walk("system"):
    if not instance.startswith("1.3.6.1.2.1.1."):
        break
    print(f"   {instance} = {value}")

acknowledged = session.release()
print(f"\nconnection released (acknowledged={acknowledged})")
print(f"operations logged this run: {len(manager.log)}")
manager.close()
