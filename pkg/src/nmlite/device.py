"""Pluggable device state: where instance values come from.

Real deployments would back this contract with an OS statistics reader;
the shipped implementation is a simulated device loaded from a text file
so the whole stack is testable on a desk.  File format, one instance per
line (# starts a comment):

    <numeric instance OID> = <TYPE> : <value> [ramp(<per-second rate>)]

    1.3.6.1.2.1.1.1.0 = STRING : lab-sim router
    1.3.6.1.2.1.1.3.0 = TIMETICKS : 0 ramp(100)
    1.3.6.1.2.1.4.3.0 = COUNTER : 1200 ramp(40)

TYPE is one of INTEGER, COUNTER, GAUGE, TIMETICKS, STRING, OID.  A ramp
annotation (numeric types only) makes the value grow at the given rate
from the moment the file is loaded, so counters behave like live ones.
"""

from __future__ import annotations

import re
import threading
import time
from dataclasses import dataclass
from typing import Optional, Protocol, Union

__all__ = [
    "DeviceError", "NoSuchInstance", "BadValue",
    "DeviceStateProvider", "SimulatedDevice", "oid_sort_key",
    "NUMERIC_TYPES",
]

NUMERIC_TYPES = frozenset(["INTEGER", "COUNTER", "GAUGE", "TIMETICKS"])
ALL_TYPES = NUMERIC_TYPES | {"STRING", "OID"}

Value = Union[int, str]


class DeviceError(Exception):
    pass


class NoSuchInstance(DeviceError):
    pass


class BadValue(DeviceError):
    """The written value does not fit the instance's type."""


class DeviceStateProvider(Protocol):
    """What the agent engine needs from a device backend."""

    def read(self, instance: str) -> Value: ...

    def write(self, instance: str, value: str) -> Value: ...

    def type_of(self, instance: str) -> str: ...

    def instances(self) -> list[str]: ...


def oid_sort_key(oid: str) -> tuple[int, ...]:
    """Numeric component key giving lexicographic OID order
    (1.3.6.1.2.1.2 before 1.3.6.1.2.1.10)."""
    return tuple(int(part) for part in oid.split("."))


@dataclass
class _Entry:
    type: str
    base: Value
    ramp_rate: float = 0.0
    origin: float = 0.0


_LINE = re.compile(r"^(?P<oid>[0-9.]+)\s*=\s*(?P<type>[A-Z]+)\s*:\s*(?P<rest>.*)$")
_RAMP = re.compile(r"^(?P<base>-?\d+)(?:\s+ramp\((?P<rate>\d+(?:\.\d+)?)\))?$")


class SimulatedDevice:
    """In-memory device state parsed from the text format above."""

    def __init__(self) -> None:
        self._entries: dict[str, _Entry] = {}
        self._lock = threading.Lock()
        self.read_failures = 0

    @classmethod
    def from_text(cls, text: str) -> "SimulatedDevice":
        device = cls()
        for lineno, raw in enumerate(text.splitlines(), start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            m = _LINE.match(line)
            if not m:
                raise DeviceError(f"line {lineno}: cannot parse {raw!r}")
            oid, type_name, rest = m.group("oid", "type", "rest")
            if type_name not in ALL_TYPES:
                raise DeviceError(f"line {lineno}: unknown type {type_name}")
            rest = rest.strip()
            if type_name in NUMERIC_TYPES:
                vm = _RAMP.match(rest)
                if not vm:
                    raise DeviceError(
                        f"line {lineno}: {type_name} wants an integer value, "
                        f"got {rest!r}")
                entry = _Entry(type=type_name, base=int(vm.group("base")),
                               ramp_rate=float(vm.group("rate") or 0.0),
                               origin=time.monotonic())
            else:
                entry = _Entry(type=type_name, base=rest)
            device._entries[oid.strip(".")] = entry
        return device

    @classmethod
    def from_file(cls, path: str) -> "SimulatedDevice":
        with open(path) as fh:
            return cls.from_text(fh.read())

    def _entry(self, instance: str) -> _Entry:
        entry = self._entries.get(instance)
        if entry is None:
            raise NoSuchInstance(instance)
        return entry

    def read(self, instance: str) -> Value:
        with self._lock:
            entry = self._entry(instance)
            if entry.type in NUMERIC_TYPES and entry.ramp_rate:
                elapsed = time.monotonic() - entry.origin
                return int(entry.base) + int(entry.ramp_rate * elapsed)
            return entry.base

    def write(self, instance: str, value: str) -> Value:
        """Set an instance; numeric types insist on integer text.  Ramps
        restart from the written value.  Returns the stored value."""
        with self._lock:
            entry = self._entry(instance)
            if entry.type in NUMERIC_TYPES:
                try:
                    entry.base = int(value)
                except ValueError:
                    raise BadValue(
                        f"{instance} is {entry.type}; {value!r} is not an "
                        f"integer") from None
                entry.origin = time.monotonic()
            else:
                entry.base = value
            return entry.base

    def type_of(self, instance: str) -> str:
        with self._lock:
            return self._entry(instance).type

    def instances(self) -> list[str]:
        with self._lock:
            return sorted(self._entries, key=oid_sort_key)

    def instances_under(self, prefix: tuple[int, ...]) -> list[str]:
        """Instances whose OID extends the given object OID, in order."""
        dotted = ".".join(str(p) for p in prefix)
        marker = dotted + "."
        return [oid for oid in self.instances() if oid.startswith(marker)]
