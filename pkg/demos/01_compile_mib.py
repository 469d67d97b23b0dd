"""Compile a MIB text file into the indexed record file and poke at it.

The compiler is a keyword-driven extractor: it pulls one record out of
every OBJECT-TYPE definition and OBJECT IDENTIFIER assignment, then lays
the records out behind an offset table so any record is two seeks away.
"""

import io

from nmlite.mib import RafReader, mib2_text, parse_mib, write_raf

records = parse_mib(mib2_text())
print(f"parsed {len(records)} records from the bundled MIB-II module\n")

print("the first rows of the compiled table:")
print(f"{'index':>5}  {'name':<16} {'parent':<12} {'id':>3}  access")
for record in records[:6]:
    print(f"{record.record_index:>5}  {record.name:<16} "
          f"{record.parent_name:<12} {record.identifier:>3}  {record.access}")

buf = io.BytesIO()
total = write_raf(records, buf)
print(f"\nwrote the record file: {total} bytes "
      f"(9-byte header + {len(records)}*8 offsets + records)")

reader = RafReader(buf)
print(f"record_count() -> {reader.record_count}")

for index in (0, 23, 200):
    record = reader.read_record(index)
    print(f"read_record({index}) -> {record.name}  "
          f"(parent {record.parent_name}, id {record.identifier}, "
          f"{record.access or 'n/a'})")

if_type = reader.read_record(23)
print(f"\nifType syntax: {if_type.syntax[:60]}...")
print(f"ifType description: {if_type.description[:70]}...")
