"""MIB handling: text parser, compiled record file, in-memory tree."""

from importlib import resources

from nmlite.mib.parser import (
    MalformedDefinition,
    MibRecord,
    parse_mib,
    parse_object_definition,
    strip_comments,
    tokenize,
)
from nmlite.mib.raf import (
    CorruptImage,
    IndexOutOfRange,
    NonDenseIndices,
    RafReader,
    SinkFailure,
    write_raf,
)
from nmlite.mib.tree import (
    DuplicateSibling,
    MibTree,
    MibTreeNode,
    NoSuchObject,
    EndOfMib,
    OidPath,
    OrphanRecord,
    InvalidOid,
    build_tree,
    parse_oid,
)

__all__ = [
    "MibRecord", "MalformedDefinition", "parse_mib", "parse_object_definition",
    "strip_comments", "tokenize",
    "write_raf", "RafReader", "CorruptImage", "IndexOutOfRange",
    "NonDenseIndices", "SinkFailure",
    "MibTree", "MibTreeNode", "OidPath", "parse_oid", "build_tree",
    "OrphanRecord", "DuplicateSibling", "NoSuchObject", "EndOfMib", "InvalidOid",
    "mib2_text",
]


def mib2_text() -> str:
    """The bundled RFC 1213 (MIB-II) module text, used by demos and tests."""
    return (resources.files("nmlite.mib") / "data" / "RFC1213-MIB.txt").read_text()
