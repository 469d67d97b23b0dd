"""nmlite: a lightweight manager/agent network management framework.

The pieces, bottom to top:

- ``nmlite.mib``      MIB text parser, compiled random-access record file,
                      and the in-memory object tree built from it.
- ``nmlite.wire``     the binary message format spoken over TCP and UDP.
- ``nmlite.security`` RSA keypairs, signature with message recovery, and
                      block encryption of returned values.
- ``nmlite.device``   the pluggable device-state provider (simulated backend).
- ``nmlite.agent``    the agent daemon.
- ``nmlite.manager``  the manager-side library (discovery, sessions, polling,
                      trap intake, operation log).
- ``nmlite.cli``      the ``nm`` command-line manager front-end.
- ``nmlite.gateway``  HTTP + event-stream gateway for the browser UI.
"""

__version__ = "0.1.0"
