#!/usr/bin/env python3
"""Regenerates src/country_table.inc from the system iso-codes package."""
import json
import sys

SRC = "/usr/share/iso-codes/json/iso_3166-1.json"

# Trade-statistics numeric codes that differ from ISO 3166-1.
EXTRA = [
    ("251", "FRA", "France"),
    ("579", "NOR", "Norway"),
    ("699", "IND", "India"),
    ("757", "CHE", "Switzerland"),
    ("842", "USA", "United States"),
    ("490", "S19", "Other Asia, nes"),
]


def main(out):
    rows = json.load(open(SRC))["3166-1"]
    entries = [(int(r["numeric"]), r["alpha_3"], r.get("common_name", r["name"])) for r in rows]
    entries += [(int(n), a, name) for n, a, name in EXTRA]
    entries.sort()
    with open(out, "w") as f:
        f.write("// Generated by tools/gen_country_table.py. Do not edit.\n")
        for num, a3, name in entries:
            name = name.replace('"', '\\"')
            f.write(f'{{{num}, "{a3}", "{name}"}},\n')


if __name__ == "__main__":
    main(sys.argv[1] if len(sys.argv) > 1 else "src/country_table.inc")
