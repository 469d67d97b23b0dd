"""In-memory MIB object tree built from a compiled record file.

The tree is assembled once at agent start and never mutated afterwards, so
request workers may navigate it concurrently without locks.  A fixed
skeleton (iso.org.dod.internet with its four standard subtrees) is seeded
under a synthetic root so numeric paths like 1.3.6.1.2.1 resolve even
though MIB files never define those ancestors.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import BinaryIO, Iterator, Optional, Union

from nmlite.mib.parser import MibRecord
from nmlite.mib.raf import RafReader

__all__ = [
    "MibTreeNode", "MibTree", "OidPath",
    "TreeError", "OrphanRecord", "DuplicateSibling", "NoSuchObject",
    "EndOfMib", "InvalidOid",
    "parse_oid", "build_tree", "SKELETON_SIZE",
]


class TreeError(Exception):
    pass


class OrphanRecord(TreeError):
    """A record names a parent that is neither a skeleton node nor an
    earlier tree node."""


class DuplicateSibling(TreeError):
    """A node with the same sub-identifier already exists under the parent."""


class NoSuchObject(TreeError):
    """A path component failed to match; ``depth`` is where it failed."""

    def __init__(self, message: str, depth: int = 0):
        self.depth = depth
        super().__init__(message)


class EndOfMib(TreeError):
    """No successor object exists."""


class InvalidOid(ValueError):
    """The OID string is syntactically malformed."""


@dataclass
class MibTreeNode:
    name: str
    identifier: int
    children: list["MibTreeNode"] = field(default_factory=list)
    raf_index: Optional[int] = None          # None on skeleton nodes
    parent: Optional["MibTreeNode"] = None
    oid: tuple[int, ...] = ()

    def child_by_identifier(self, identifier: int) -> Optional["MibTreeNode"]:
        for child in self.children:
            if child.identifier == identifier:
                return child
        return None

    def level(self) -> list[tuple[str, int]]:
        """(name, identifier) pairs of the children, in identifier order."""
        return [(c.name, c.identifier) for c in self.children]

    def numeric_oid(self) -> str:
        return ".".join(str(part) for part in self.oid)

    def __repr__(self) -> str:  # pragma: no cover - debugging aid
        return f"MibTreeNode({self.name!r}, {self.numeric_oid()})"


@dataclass
class OidPath:
    """A parsed OID string: name or numeric components, plus an optional
    numeric instance suffix split off during instance resolution."""

    components: list[Union[str, int]]
    instance_suffix: tuple[int, ...] = ()


_NAME_COMPONENT = re.compile(r"[A-Za-z][A-Za-z0-9-]*$")


def parse_oid(text: str) -> OidPath:
    """Syntax-only parse of a dotted OID string (numeric, names, or mixed).

    Raises :class:`InvalidOid` on empty strings, empty components ("1..3"),
    or components that are neither decimal integers nor identifiers.
    """
    if not isinstance(text, str) or not text.strip():
        raise InvalidOid("empty OID string")
    components: list[Union[str, int]] = []
    for part in text.strip().split("."):
        if not part:
            raise InvalidOid(f"empty component in {text!r}")
        if part.isdigit():
            components.append(int(part))
        elif _NAME_COMPONENT.match(part):
            components.append(part)
        else:
            raise InvalidOid(f"bad component {part!r} in {text!r}")
    return OidPath(components)


# Standard skeleton under the synthetic root:
# iso(1).org(3).dod(6).internet(1).{directory(1), mgmt(2), experimental(3),
# private(4).enterprises(1)}
_SKELETON = [
    ("iso", 1, None),
    ("org", 3, "iso"),
    ("dod", 6, "org"),
    ("internet", 1, "dod"),
    ("directory", 1, "internet"),
    ("mgmt", 2, "internet"),
    ("experimental", 3, "internet"),
    ("private", 4, "internet"),
    ("enterprises", 1, "private"),
]

SKELETON_SIZE = len(_SKELETON) + 1  # skeleton nodes plus the synthetic root


class MibTree:
    """The navigable object tree plus a by-name index for parent linking."""

    def __init__(self) -> None:
        self.root = MibTreeNode(name="", identifier=0)
        self._by_name: dict[str, MibTreeNode] = {}
        self.node_count = 1
        for name, identifier, parent in _SKELETON:
            parent_node = self.root if parent is None else self._by_name[parent.lower()]
            self._attach(parent_node, MibTreeNode(name=name, identifier=identifier))

    def _attach(self, parent: MibTreeNode, node: MibTreeNode) -> MibTreeNode:
        if parent.child_by_identifier(node.identifier) is not None:
            raise DuplicateSibling(
                f"{parent.name or '<root>'} already has a child with "
                f"identifier {node.identifier}")
        node.parent = parent
        node.oid = parent.oid + (node.identifier,)
        parent.children.append(node)
        parent.children.sort(key=lambda c: c.identifier)
        self._by_name.setdefault(node.name.lower(), node)
        self.node_count += 1
        return node

    def insert_node(self, record: MibRecord) -> MibTreeNode:
        """Insert one record under its parent (matched case-insensitively).

        The new node carries the record's name, sub-identifier and record
        index; the parent's child list is re-ordered by identifier.
        """
        parent = self._by_name.get(record.parent_name.lower())
        if parent is None:
            raise OrphanRecord(
                f"record {record.name!r}: parent {record.parent_name!r} "
                f"not present in the tree")
        node = MibTreeNode(name=record.name, identifier=record.identifier,
                           raf_index=record.record_index)
        return self._attach(parent, node)

    # -- navigation ------------------------------------------------------

    def resolve(self, path: Union[str, OidPath]) -> MibTreeNode:
        """Walk from the root matching each component against child name
        (exact, case-sensitive) or numeric identifier.

        As a convenience for paths typed by an operator, a first component
        that is a name but not a root child is looked up anywhere in the
        tree ("ifType" alone addresses the ifType node)."""
        if isinstance(path, str):
            path = parse_oid(path)
        node = self.root
        for depth, component in enumerate(path.components):
            try:
                node = self._match_child(node, component, depth)
            except NoSuchObject:
                anchor = self._name_anchor(component) if depth == 0 else None
                if anchor is None:
                    raise
                node = anchor
        return node

    def resolve_instance(
        self, path: Union[str, OidPath]
    ) -> tuple[MibTreeNode, tuple[int, ...]]:
        """Resolve as deep as possible; trailing all-numeric components that
        fail to match become the instance suffix (e.g. the ``.0``)."""
        if isinstance(path, str):
            path = parse_oid(path)
        node = self.root
        components = path.components
        for depth, component in enumerate(components):
            try:
                node = self._match_child(node, component, depth)
            except NoSuchObject:
                if depth == 0:
                    anchor = self._name_anchor(component)
                    if anchor is not None:
                        node = anchor
                        continue
                rest = components[depth:]
                # instances hang off leaf objects only; an unmatched
                # component under an interior node is an unknown object
                if (node is not self.root and not node.children
                        and all(isinstance(part, int) for part in rest)):
                    return node, tuple(rest)  # type: ignore[arg-type]
                raise
        return node, tuple(path.instance_suffix)

    def _name_anchor(self, component: Union[str, int]) -> Optional[MibTreeNode]:
        if not isinstance(component, str):
            return None
        candidate = self._by_name.get(component.lower())
        if candidate is not None and candidate.name == component:
            return candidate
        return None

    @staticmethod
    def _match_child(node: MibTreeNode, component: Union[str, int],
                     depth: int) -> MibTreeNode:
        if isinstance(component, int):
            child = node.child_by_identifier(component)
        else:
            child = next((c for c in node.children if c.name == component), None)
        if child is None:
            raise NoSuchObject(
                f"no child {component!r} under "
                f"{node.name or '<root>'} (depth {depth})", depth=depth)
        return child

    def next_level(self, path: Union[str, OidPath]) -> list[tuple[str, int]]:
        """Children of the resolved node, in identifier order."""
        return self.resolve(path).level()

    def upper_level(self, path: Union[str, OidPath]) -> list[tuple[str, int]]:
        """Child list of the resolved node's grandparent: the node's parent
        and its siblings.  Nodes at depth <= 1 fall back to the root's
        child list."""
        node = self.resolve(path)
        grandparent = node.parent.parent if node.parent is not None else None
        if grandparent is None:
            return self.root.level()
        return grandparent.level()

    def object_successor(self, node_or_path: Union[str, OidPath, MibTreeNode]
                         ) -> MibTreeNode:
        """Depth-first pre-order successor (children before right siblings),
        i.e. the lexicographic Get-Next order over object nodes."""
        node = (node_or_path if isinstance(node_or_path, MibTreeNode)
                else self.resolve(node_or_path))
        if node.children:
            return node.children[0]
        while node.parent is not None:
            siblings = node.parent.children
            position = siblings.index(node)
            if position + 1 < len(siblings):
                return siblings[position + 1]
            node = node.parent
        raise EndOfMib("no successor object")

    def root_level(self) -> list[tuple[str, int]]:
        """The reply to an initialise request: the root's child list."""
        return self.root.level()

    def walk(self) -> Iterator[MibTreeNode]:
        """All object nodes in depth-first pre-order (root excluded)."""
        stack = list(reversed(self.root.children))
        while stack:
            node = stack.pop()
            yield node
            stack.extend(reversed(node.children))


def build_tree(raf: Union[RafReader, BinaryIO]) -> MibTree:
    """Build the tree by sequentially reading every record of the image.

    Raises :class:`OrphanRecord` when a record's parent is neither a
    skeleton node nor an earlier record's node.  The finished tree has
    record_count + 10 nodes (the 10 counts the skeleton and synthetic root).
    """
    reader = raf if isinstance(raf, RafReader) else RafReader(raf)
    tree = MibTree()
    for record in reader:
        tree.insert_node(record)
    return tree
