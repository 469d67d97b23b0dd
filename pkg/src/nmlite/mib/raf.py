"""Indexed binary record file for compiled MIB records.

The compiler writes all records once; afterwards the file is immutable and
any record can be fetched with two seeks (offset-table entry, record body),
independent of its index.

Layout, all integers big-endian:

    magic   4 bytes   b"MRAF"
    version 1 byte    0x01
    count   4 bytes   number of records
    offsets count * 8 bytes, absolute file offsets, strictly increasing
    records each: six UTF-8 strings (2-byte length prefix each) in the
            order name, syntax, access, status, description, parent_name,
            then the sub-identifier as 4 bytes

The 2-byte length prefix caps every string field at 65535 encoded bytes.
``record_index`` is not stored: it is the record's position in the table.
"""

from __future__ import annotations

import struct
from typing import BinaryIO, Iterator

from nmlite.mib.parser import MibRecord

__all__ = [
    "MAGIC", "VERSION",
    "RafError", "CorruptImage", "IndexOutOfRange", "NonDenseIndices",
    "SinkFailure",
    "write_raf", "RafReader", "load_records",
]

MAGIC = b"MRAF"
VERSION = 1

_HEADER = struct.Struct(">4sBI")   # magic, version, count
_OFFSET = struct.Struct(">Q")
_FIELD_LEN = struct.Struct(">H")
_IDENT = struct.Struct(">I")


class RafError(Exception):
    pass


class CorruptImage(RafError):
    """Bad magic/version, impossible offsets, or a truncated image."""


class IndexOutOfRange(RafError, IndexError):
    pass


class NonDenseIndices(RafError):
    """Records passed to write_raf must carry record_index 0..N-1 in order."""


class SinkFailure(RafError):
    """The byte sink raised while writing."""


_STRING_FIELDS = ("name", "syntax", "access", "status", "description",
                  "parent_name")


def _encode_record(record: MibRecord) -> bytes:
    parts: list[bytes] = []
    for attr in _STRING_FIELDS:
        data = getattr(record, attr).encode("utf-8")
        if len(data) > 0xFFFF:
            raise RafError(f"record {record.name!r}: field {attr} exceeds "
                           f"65535 bytes")
        parts.append(_FIELD_LEN.pack(len(data)))
        parts.append(data)
    parts.append(_IDENT.pack(record.identifier))
    return b"".join(parts)


def write_raf(records: list[MibRecord], sink: BinaryIO) -> int:
    """Serialize records into ``sink``; returns total bytes written.

    Records must arrive in index order with dense indices 0..N-1
    (:class:`NonDenseIndices` otherwise).  Write errors from the sink are
    wrapped in :class:`SinkFailure`.
    """
    for position, record in enumerate(records):
        if record.record_index != position:
            raise NonDenseIndices(
                f"record at position {position} has index "
                f"{record.record_index}")

    bodies = [_encode_record(r) for r in records]
    header = _HEADER.pack(MAGIC, VERSION, len(records))
    table_size = len(records) * _OFFSET.size
    offset = len(header) + table_size
    offsets: list[int] = []
    for body in bodies:
        offsets.append(offset)
        offset += len(body)

    try:
        written = sink.write(header)
        for off in offsets:
            written += sink.write(_OFFSET.pack(off))
        for body in bodies:
            written += sink.write(body)
    except OSError as exc:
        raise SinkFailure(str(exc)) from exc
    return written


class RafReader:
    """Random-access view over a record file.

    The header and offset table are validated once at construction; each
    :meth:`read_record` afterwards costs exactly two seeks on the source.
    The source must support ``seek``/``read`` and stays open for the
    reader's lifetime (images are immutable, so one reader may be shared by
    concurrent threads only if the underlying file object is; open one
    reader per thread when in doubt).
    """

    def __init__(self, source: BinaryIO):
        self._source = source
        source.seek(0, 2)
        size = source.tell()
        source.seek(0)
        header = source.read(_HEADER.size)
        if len(header) < _HEADER.size:
            raise CorruptImage("truncated header")
        magic, version, count = _HEADER.unpack(header)
        if magic != MAGIC:
            raise CorruptImage(f"bad magic {magic!r}")
        if version != VERSION:
            raise CorruptImage(f"unsupported version {version}")
        table = source.read(count * _OFFSET.size)
        if len(table) < count * _OFFSET.size:
            raise CorruptImage("truncated offset table")
        previous = 0
        for i in range(count):
            (off,) = _OFFSET.unpack_from(table, i * _OFFSET.size)
            if off <= previous or off >= size:
                raise CorruptImage(f"offset table entry {i} out of order "
                                   f"or out of bounds")
            previous = off
        self._count = count
        self._table_base = _HEADER.size

    @property
    def record_count(self) -> int:
        return self._count

    def _read_exact(self, n: int) -> bytes:
        data = self._source.read(n)
        if len(data) < n:
            raise CorruptImage("truncated record")
        return data

    def read_record(self, index: int) -> MibRecord:
        """Fetch the record at ``index`` via the offset table (two seeks)."""
        if not 0 <= index < self._count:
            raise IndexOutOfRange(f"index {index} not in 0..{self._count - 1}")
        self._source.seek(self._table_base + index * _OFFSET.size)
        (offset,) = _OFFSET.unpack(self._read_exact(_OFFSET.size))
        self._source.seek(offset)
        values: dict[str, str] = {}
        for attr in _STRING_FIELDS:
            (length,) = _FIELD_LEN.unpack(self._read_exact(_FIELD_LEN.size))
            values[attr] = self._read_exact(length).decode("utf-8")
        (identifier,) = _IDENT.unpack(self._read_exact(_IDENT.size))
        return MibRecord(identifier=identifier, record_index=index, **values)

    def __iter__(self) -> Iterator[MibRecord]:
        for i in range(self._count):
            yield self.read_record(i)


def load_records(source: BinaryIO) -> list[MibRecord]:
    """Sequentially read every record of an image (agent start-up path)."""
    return list(RafReader(source))
