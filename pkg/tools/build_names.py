"""Regenerate src/glyphgate/data/names.tsv from Faker's en_US person provider.

Usage: python tools/build_names.py PATH/TO/faker/providers/person/en_US/__init__.py

The provider module is read as source (no import) and its first/last name
frequency tables are copied verbatim. Faker is MIT licensed; see
data/NAMES_LICENSE.md.
"""

import ast
import sys
from pathlib import Path

OUT = Path(__file__).resolve().parent.parent / "src" / "glyphgate" / "data" / "names.tsv"
TABLES = {"first_names_female": "first", "first_names_male": "first", "last_names": "last"}


def extract(source: str) -> dict:
    tree = ast.parse(source)
    found = {}
    for node in ast.walk(tree):
        if isinstance(node, ast.Assign) and len(node.targets) == 1:
            name = getattr(node.targets[0], "id", None)
            if name in TABLES and isinstance(node.value, ast.Call):
                found[name] = ast.literal_eval(node.value.args[0])
    return found


def main(path):
    tables = extract(Path(path).read_text(encoding="utf-8"))
    rows = {}
    for name, kind in TABLES.items():
        for entry, weight in tables[name]:
            key = (entry, kind)
            rows[key] = rows.get(key, 0.0) + float(weight)
    with open(OUT, "w", encoding="utf-8") as f:
        f.write("# name\tkind\tweight  (source: Faker en_US person provider, MIT)\n")
        for (entry, kind), weight in sorted(rows.items(), key=lambda kv: (kv[0][1], kv[0][0])):
            f.write(f"{entry}\t{kind}\t{weight:.9g}\n")
    print(f"wrote {len(rows)} rows to {OUT}")


if __name__ == "__main__":
    main(sys.argv[1])
