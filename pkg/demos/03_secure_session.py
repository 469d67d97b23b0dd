"""Request signing and value encryption.

The manager holds the full keypair (n, e, d); the agent is provisioned
with just the public part.  A secured request is signed with the private
exponent over the message's own bytes (signature with message recovery,
no digest); the agent recovers those bytes with the public exponent,
compares them to what arrived, and encrypts the returned value with the
public exponent so only the manager can read it.

Raw RSA like this is faithful to early manager/agent security designs but
insecure by modern standards; treat it as a study piece.
"""

import time

from _lab import LOOPBACK_BCAST, build_lab
from nmlite import security
from nmlite.manager import DeniedByAgent, Manager

# the classic toy numbers first: small enough to check by hand
toy = security.RsaKeyPair.from_primes(61, 53, 17)
print(f"toy key: n={toy.n} e={toy.e} d={toy.d}")
print(f"encrypt block 65  -> {security.apply_block(65, toy.e, toy.n)}")
print(f"decrypt it back   -> "
      f"{security.apply_block(security.apply_block(65, toy.e, toy.n), toy.d, toy.n)}")

signature = security.sign(b"A", toy)
print(f"sign b'A'         -> block {int.from_bytes(signature, 'big')}")
print(f"recover           -> {security.verify_recover(signature, toy)}\n")

# an agent that refuses anything unsigned
agent, key, workdir = build_lab(base_port=27830, security_required=True)
time.sleep(0.2)
manager = Manager(key=key, discovery_port=agent.config.discovery_port,
                  broadcast_address=LOOPBACK_BCAST)

try:
    manager.open_session(("127.0.0.1", agent.config.tcp_port))
except DeniedByAgent as exc:
    print(f"unsigned session rejected as expected: {exc}")

session = manager.open_session(("127.0.0.1", agent.config.tcp_port),
                               security_enabled=True)
instance, value = session.get("sysDescr.0")
print(f"signed GET {instance} -> {value!r}")
print("(the value crossed the wire as cipher blocks; the session "
      "decrypted it with the private exponent)")

tampered = bytearray(security.sign(b"please", key))
tampered[0] ^= 0x40
try:
    security.verify_recover(bytes(tampered), key)
    print("tampered signature recovered to different bytes (caller rejects)")
except security.SentinelMismatch:
    print("tampered signature rejected structurally (sentinel lost)")

session.release()
manager.close()
