"""Keyword-driven SMI MIB parser.

Extracts one record per OBJECT-TYPE definition and per OBJECT IDENTIFIER
assignment from a MIB text file, in source order.  This is deliberately not
a full ASN.1/SMI grammar: the scanner strips comments, tokenizes, and then
matches a handful of clause keywords (SYNTAX, ACCESS/MAX-ACCESS, STATUS,
DESCRIPTION, and the trailing ``::= { parent n }``).  IMPORTS sections,
SEQUENCE row types, textual conventions and MODULE-IDENTITY bodies are
skipped without producing records.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Iterator, NamedTuple, Sequence

__all__ = [
    "MibRecord",
    "MalformedDefinition",
    "Token",
    "strip_comments",
    "tokenize",
    "parse_object_definition",
    "parse_mib",
]


class MalformedDefinition(ValueError):
    """An object definition is missing its ``::= { parent n }`` clause or the
    sub-identifier is not a decimal integer."""

    def __init__(self, message: str, line: int = 0):
        self.line = line
        super().__init__(f"line {line}: {message}" if line else message)


@dataclass
class MibRecord:
    """One parsed MIB object (one row of the compiled record file).

    ``record_index`` is the object's position in source order; it is -1 on
    records produced by :func:`parse_object_definition` in isolation and is
    assigned densely (0..N-1) by :func:`parse_mib`.
    """

    name: str
    syntax: str = ""
    access: str = ""
    status: str = ""
    description: str = ""
    parent_name: str = ""
    identifier: int = 0
    record_index: int = -1


class Token(NamedTuple):
    kind: str  # NAME | NUMBER | STRING | PUNCT
    text: str
    line: int


# Clause keywords that terminate a SYNTAX value.
_CLAUSE_KEYWORDS = frozenset(
    ["SYNTAX", "ACCESS", "MAX-ACCESS", "STATUS", "DESCRIPTION",
     "REFERENCE", "INDEX", "DEFVAL", "UNITS"]
)

_TOKEN_RE = re.compile(
    r'"[^"]*"'               # quoted string (SMI strings have no escapes)
    r"|::=|\.\."             # multi-char punctuation
    r"|[A-Za-z][A-Za-z0-9-]*"  # identifier / keyword
    r"|-?\d+"                # integer
    r"|[{}(),;|]"            # single-char punctuation
)


def strip_comments(line: str) -> str:
    """Remove an SMI ``--`` comment from a single source line.

    Everything from the first ``--`` introducer to end-of-line is dropped;
    ``--`` inside a double-quoted string is left alone.  The line is
    otherwise returned verbatim (total function, never raises).
    """
    in_quote = False
    i, n = 0, len(line)
    while i < n:
        c = line[i]
        if c == '"':
            in_quote = not in_quote
        elif not in_quote and c == "-" and i + 1 < n and line[i + 1] == "-":
            return line[:i]
        i += 1
    return line


def _strip_comments_document(text: str) -> str:
    """Comment removal over a whole document, carrying quote state across
    lines so that ``--`` inside multi-line DESCRIPTION strings survives.
    Newlines are preserved, keeping line numbers stable."""
    out: list[str] = []
    in_quote = False
    i, n = 0, len(text)
    while i < n:
        c = text[i]
        if c == '"':
            in_quote = not in_quote
            out.append(c)
        elif not in_quote and c == "-" and i + 1 < n and text[i + 1] == "-":
            while i < n and text[i] != "\n":
                i += 1
            continue
        else:
            out.append(c)
        i += 1
    return "".join(out)


def tokenize(text: str) -> list[Token]:
    """Tokenize MIB source after comment removal.

    Quoted strings become single STRING tokens whose text is the verbatim
    content between the quotes (inner newlines preserved).
    """
    stripped = _strip_comments_document(text)
    tokens: list[Token] = []
    for m in _TOKEN_RE.finditer(stripped):
        raw = m.group(0)
        line = stripped.count("\n", 0, m.start()) + 1
        if raw.startswith('"'):
            tokens.append(Token("STRING", raw[1:-1], line))
        elif raw == "::=" or raw == ".." or (len(raw) == 1 and not raw.isalnum()):
            tokens.append(Token("PUNCT", raw, line))
        elif raw.lstrip("-").isdigit():
            tokens.append(Token("NUMBER", raw, line))
        else:
            tokens.append(Token("NAME", raw, line))
    return tokens


def _render_syntax(tokens: Sequence[Token]) -> str:
    """Join SYNTAX tokens back into a compact one-line rendering."""
    parts: list[str] = []
    prev: Token | None = None
    for tok in tokens:
        t = tok.text
        if prev is None:
            parts.append(t)
        elif t in (",", ")"):
            parts.append(t)
        elif t == "(" and prev.kind in ("NAME", "NUMBER"):
            parts.append(t)
        elif prev.text in ("(", ".."):
            parts.append(t)
        elif t == "..":
            parts.append(t)
        else:
            parts.append(" " + t)
        prev = tok
    return "".join(parts)


def _parse_assignment_clause(
    tokens: Sequence[Token], pos: int, name: str
) -> tuple[str, int, int]:
    """Parse ``{ parent n }`` starting at tokens[pos] (the ``{``).

    Multi-component assignments use only the last two components: the
    second-to-last names the parent, the last must be a decimal integer.
    Returns (parent_name, identifier, index-after-closing-brace).
    """
    line = tokens[pos - 1].line if pos > 0 else 0
    if pos >= len(tokens) or tokens[pos].text != "{":
        raise MalformedDefinition(f"{name}: expected '{{' after '::='", line)
    pos += 1
    # components: NAME, NUMBER, or NAME(NUMBER)
    components: list[tuple[str, int | None]] = []
    while pos < len(tokens) and tokens[pos].text != "}":
        tok = tokens[pos]
        if tok.kind == "NAME":
            if pos + 3 < len(tokens) and tokens[pos + 1].text == "(" \
                    and tokens[pos + 2].kind == "NUMBER" \
                    and tokens[pos + 3].text == ")":
                components.append((tok.text, int(tokens[pos + 2].text)))
                pos += 4
            else:
                components.append((tok.text, None))
                pos += 1
        elif tok.kind == "NUMBER":
            components.append((tok.text, int(tok.text)))
            pos += 1
        else:
            raise MalformedDefinition(
                f"{name}: unexpected {tok.text!r} in assignment", tok.line)
    if pos >= len(tokens):
        raise MalformedDefinition(f"{name}: unterminated assignment clause", line)
    end_line = tokens[pos].line
    pos += 1  # consume '}'
    if len(components) < 2:
        raise MalformedDefinition(
            f"{name}: assignment needs a parent and a sub-identifier", end_line)
    last_text, last_num = components[-1]
    if last_num is None:
        raise MalformedDefinition(
            f"{name}: sub-identifier {last_text!r} is not a decimal integer",
            end_line)
    if last_num < 0:
        raise MalformedDefinition(
            f"{name}: sub-identifier must be non-negative", end_line)
    parent = components[-2][0]
    return parent, last_num, pos


def _parse_definition(tokens: Sequence[Token], start: int) -> tuple[MibRecord, int]:
    """Parse one definition whose token window begins at ``start``.

    The window must start at an identifier followed either by OBJECT-TYPE or
    by ``OBJECT IDENTIFIER ::=``.  Returns the record and the index of the
    first token past the definition.
    """
    name_tok = tokens[start]
    name = name_tok.text

    if start + 1 < len(tokens) and tokens[start + 1].text == "OBJECT-TYPE":
        pos = start + 2
        syntax = access = status = description = ""
        while pos < len(tokens) and tokens[pos].text != "::=":
            kw = tokens[pos].text
            if kw == "SYNTAX":
                pos += 1
                begin = pos
                depth = 0
                while pos < len(tokens):
                    t = tokens[pos].text
                    if depth == 0 and (t in _CLAUSE_KEYWORDS or t == "::="):
                        break
                    if t in ("{", "("):
                        depth += 1
                    elif t in ("}", ")"):
                        depth -= 1
                    pos += 1
                syntax = _render_syntax(tokens[begin:pos])
            elif kw in ("ACCESS", "MAX-ACCESS"):
                pos += 1
                if pos < len(tokens):
                    access = tokens[pos].text
                    pos += 1
            elif kw == "STATUS":
                pos += 1
                if pos < len(tokens):
                    status = tokens[pos].text
                    pos += 1
            elif kw == "DESCRIPTION":
                pos += 1
                if pos < len(tokens) and tokens[pos].kind == "STRING":
                    description = tokens[pos].text.strip()
                    pos += 1
            else:
                pos += 1  # unrecognized clause content (INDEX lists, etc.)
        if pos >= len(tokens):
            raise MalformedDefinition(
                f"{name}: missing '::= {{ parent n }}' clause", name_tok.line)
        parent, ident, pos = _parse_assignment_clause(tokens, pos + 1, name)
        record = MibRecord(name=name, syntax=syntax, access=access,
                           status=status, description=description,
                           parent_name=parent, identifier=ident)
        return record, pos

    if (start + 3 < len(tokens)
            and tokens[start + 1].text == "OBJECT"
            and tokens[start + 2].text == "IDENTIFIER"
            and tokens[start + 3].text == "::="):
        parent, ident, pos = _parse_assignment_clause(tokens, start + 4, name)
        return MibRecord(name=name, parent_name=parent, identifier=ident), pos

    raise MalformedDefinition(
        f"{name}: token window is not an object definition", name_tok.line)


def parse_object_definition(tokens: Sequence[Token], start: int = 0) -> MibRecord:
    """Parse a single object definition from a token window.

    ``record_index`` is left unassigned (-1); :func:`parse_mib` assigns it.
    """
    record, _end = _parse_definition(tokens, start)
    return record


def _scan_definitions(tokens: Sequence[Token]) -> Iterator[MibRecord]:
    i = 0
    n = len(tokens)
    while i < n:
        tok = tokens[i]
        if tok.kind == "NAME" and tok.text in ("IMPORTS", "EXPORTS"):
            while i < n and tokens[i].text != ";":
                i += 1
            i += 1
            continue
        if tok.kind == "NAME" and i + 1 < n:
            nxt = tokens[i + 1].text
            is_object_type = nxt == "OBJECT-TYPE"
            is_oid_assign = (nxt == "OBJECT" and i + 3 < n
                             and tokens[i + 2].text == "IDENTIFIER"
                             and tokens[i + 3].text == "::=")
            if is_object_type or is_oid_assign:
                record, i = _parse_definition(tokens, i)
                yield record
                continue
        i += 1


def parse_mib(source: str) -> list[MibRecord]:
    """Parse a MIB document into records in source order.

    Every OBJECT-TYPE definition and OBJECT IDENTIFIER assignment yields one
    record, with ``record_index`` assigned 0..N-1 in source order.  Other
    constructs are skipped.  An empty document yields an empty list.

    Raises :class:`MalformedDefinition` (with line number) when a matched
    definition lacks a valid ``::= { parent n }`` clause.
    """
    records: list[MibRecord] = []
    for record in _scan_definitions(tokenize(source)):
        record.record_index = len(records)
        records.append(record)
    return records
