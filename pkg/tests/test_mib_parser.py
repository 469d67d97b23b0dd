"""Parser tests.  Derived expectations are computed by small independent
oracles inside this file before being asserted against the parser."""

import textwrap

import pytest

from nmlite.mib.parser import (MalformedDefinition, MibRecord, parse_mib,
                               parse_object_definition, strip_comments,
                               tokenize)
from nmlite.mib import mib2_text


def oracle_strip(line: str) -> str:
    """Independent line scanner: cut at the first -- outside quotes."""
    quoted = False
    for i in range(len(line)):
        if line[i] == '"':
            quoted = not quoted
        if not quoted and line[i:i + 2] == "--":
            return line[:i]
    return line


class TestStripComments:
    def test_comment_removed(self):
        assert strip_comments("ifType OBJECT-TYPE -- the type") == \
            "ifType OBJECT-TYPE "

    def test_no_comment(self):
        assert strip_comments("plain line") == "plain line"

    def test_quoted_dashes_protected(self):
        line = 'DESCRIPTION "a -- b"'
        assert strip_comments(line) == line
        assert strip_comments(line) == oracle_strip(line)

    def test_matches_oracle_on_mixed_lines(self):
        lines = [
            "x -- y -- z",
            '"--" -- trailing',
            'a "quoted -- inside" -- outside',
            "--leading",
            "",
            "no dashes at all",
            'open quote " then -- inside',
        ]
        for line in lines:
            assert strip_comments(line) == oracle_strip(line), line


SMALL_MIB = textwrap.dedent("""\
    TEST-MIB DEFINITIONS ::= BEGIN

    IMPORTS
            mgmt, Counter FROM RFC1155-SMI
            OBJECT-TYPE FROM RFC-1212;

    mib-2 OBJECT IDENTIFIER ::= { mgmt 1 }

    widgets OBJECT IDENTIFIER ::= { mib-2 250 }

    widgetCount OBJECT-TYPE
        SYNTAX  Counter
        ACCESS  read-only
        STATUS  mandatory
        DESCRIPTION
                "How many widgets
                 the box currently holds."
        ::= { widgets 1 }

    widgetName OBJECT-TYPE
        SYNTAX  OCTET STRING (SIZE (0..32))
        MAX-ACCESS  read-write
        STATUS  current
        ::= { widgets 2 }

    WidgetEntry ::= SEQUENCE {
        widgetIndex INTEGER,
        widgetLabel OCTET STRING
    }

    widgetMode OBJECT-TYPE
        SYNTAX  INTEGER { idle(1), busy(2) }
        ACCESS  read-write
        STATUS  mandatory
        DESCRIPTION "Current operating mode."  -- trailing note
        ::= { widgets 3 }

    END
    """)


class TestParseObjectDefinition:
    def test_oid_assignment(self):
        tokens = tokenize("mib-2 OBJECT IDENTIFIER ::= { mgmt 1 }")
        record = parse_object_definition(tokens)
        assert record == MibRecord(name="mib-2", parent_name="mgmt",
                                   identifier=1, record_index=-1)
        assert record.syntax == record.access == record.status == \
            record.description == ""

    def test_iftype_block_from_mib2(self, mib2_records):
        by_name = {r.name: r for r in mib2_records}
        record = by_name["ifType"]
        assert record.syntax.startswith("INTEGER {")
        assert "ethernet-csmacd(6)" in record.syntax
        assert record.access == "read-only"
        assert record.status == "mandatory"
        assert record.parent_name == "ifEntry"
        assert record.identifier == 3
        assert record.description.startswith("The type")
        assert record.description.endswith("stack.")

    def test_absent_description_is_empty(self):
        tokens = tokenize(SMALL_MIB)
        # find widgetName's window
        start = next(i for i, t in enumerate(tokens)
                     if t.text == "widgetName")
        record = parse_object_definition(tokens, start)
        assert record.description == ""
        assert record.access == "read-write"  # MAX-ACCESS normalized verbatim
        assert record.status == "current"

    def test_missing_assignment_clause(self):
        tokens = tokenize("thing OBJECT-TYPE SYNTAX INTEGER ACCESS read-only")
        with pytest.raises(MalformedDefinition):
            parse_object_definition(tokens)

    def test_non_integer_identifier(self):
        tokens = tokenize("thing OBJECT IDENTIFIER ::= { parent child }")
        with pytest.raises(MalformedDefinition):
            parse_object_definition(tokens)

    def test_multi_component_assignment_uses_last_two(self):
        tokens = tokenize("internet OBJECT IDENTIFIER ::= { iso org(3) dod(6) 1 }")
        record = parse_object_definition(tokens)
        assert record.parent_name == "dod"
        assert record.identifier == 1


class TestParseMib:
    def test_mib2_first_three(self, mib2_records):
        head = [(r.name, r.record_index) for r in mib2_records[:3]]
        assert head == [("mib-2", 0), ("system", 1), ("interfaces", 2)]

    def test_empty_document(self):
        assert parse_mib("") == []
        assert parse_mib("-- only a comment\n") == []

    def test_synthetic_mib_order_matches_source_offsets(self):
        records = parse_mib(SMALL_MIB)
        names = [r.name for r in records]
        # oracle: textual order by byte offset of each definition
        expected = sorted(names, key=lambda n: SMALL_MIB.index(n + " "))
        assert names == expected
        assert [r.record_index for r in records] == list(range(len(records)))
        assert len(records) == 5  # 2 OID assignments + 3 OBJECT-TYPEs

    def test_sequence_and_imports_produce_no_records(self):
        names = [r.name for r in parse_mib(SMALL_MIB)]
        assert "WidgetEntry" not in names
        assert "RFC1155-SMI" not in names
        assert "Counter" not in names

    def test_module_identity_body_skipped(self):
        source = SMALL_MIB.replace(
            "mib-2 OBJECT IDENTIFIER ::= { mgmt 1 }",
            'demo MODULE-IDENTITY\n LAST-UPDATED "9901010000Z"\n'
            ' DESCRIPTION "demo"\n ::= { mgmt 9 }\n\n'
            "mib-2 OBJECT IDENTIFIER ::= { mgmt 1 }")
        names = [r.name for r in parse_mib(source)]
        assert "demo" not in names
        assert names[0] == "mib-2"

    def test_multiline_description_verbatim(self):
        records = parse_mib(SMALL_MIB)
        widget_count = next(r for r in records if r.name == "widgetCount")
        assert "\n" in widget_count.description
        assert widget_count.description.startswith("How many widgets")
        assert widget_count.description.endswith("holds.")

    def test_malformed_reports_line(self):
        source = "good OBJECT IDENTIFIER ::= { mgmt 1 }\n\nbad OBJECT-TYPE\n  SYNTAX INTEGER\n"
        with pytest.raises(MalformedDefinition) as excinfo:
            parse_mib(source)
        assert "bad" in str(excinfo.value)

    def test_enable_authen_traps_reports_what_input_says(self, mib2_records):
        # RFC 1213 declares it read-write; the parser must not "fix" it
        record = next(r for r in mib2_records
                      if r.name == "snmpEnableAuthenTraps")
        assert record.access == "read-write"
        assert record.parent_name == "snmp"
        assert record.identifier == 30


class TestInvariants:
    def test_determinism(self):
        text = mib2_text()
        first = parse_mib(text)
        second = parse_mib(text)
        assert first == second

    def test_comment_insensitivity(self):
        # injecting comments between tokens never changes the record list;
        # lines inside a multi-line quoted string are left untouched
        baseline = parse_mib(SMALL_MIB)
        commented = []
        inside_string = False
        for line in SMALL_MIB.splitlines():
            starts_inside = inside_string
            inside_string = (inside_string + line.count('"')) % 2 == 1
            if starts_inside or inside_string:
                commented.append(line)
            else:
                commented.append(line + "   -- injected noise")
                commented.append("-- a full-line comment")
        assert parse_mib("\n".join(commented)) == baseline

    def test_index_density(self, mib2_records):
        assert [r.record_index for r in mib2_records] == \
            list(range(len(mib2_records)))

    def test_window_reparse_equivalence(self, mib2_records):
        """Each record's own token window parses to the same record
        (modulo record_index)."""
        import dataclasses

        tokens = tokenize(mib2_text())
        starts = []
        for i, tok in enumerate(tokens):
            if tok.kind != "NAME" or i + 1 >= len(tokens):
                continue
            nxt = tokens[i + 1].text
            if nxt == "OBJECT-TYPE" or (
                    nxt == "OBJECT" and i + 3 < len(tokens)
                    and tokens[i + 2].text == "IDENTIFIER"
                    and tokens[i + 3].text == "::="):
                starts.append(i)
        # the IMPORTS section is skipped by parse_mib; drop matches before
        # the first real record (mib-2)
        starts = [s for s in starts if tokens[s].text != "RFC1155-SMI"]
        assert len(starts) == len(mib2_records)
        for start, expected in zip(starts, mib2_records):
            record = parse_object_definition(tokens, start)
            assert record == dataclasses.replace(expected, record_index=-1)
