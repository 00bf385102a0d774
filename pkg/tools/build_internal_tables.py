"""Regenerate src/glyphgate/data/internal/*.csv.

Tables start from the dot-rounding rule in
``glyphgate.schemes.word.synthesize_internal_widths`` and then receive the
hand-fit overrides below, each tied to a reference line it reproduces.
"""

from pathlib import Path

from glyphgate.metrics import BUILTIN_FONTS, load_metrics
from glyphgate.schemes.word import InternalWidthTable, synthesize_internal_widths, write_internal_table

OUT = Path(__file__).resolve().parent.parent / "src" / "glyphgate" / "data" / "internal"
SIZES = (10, 12, 14)
VERSIONS = (2007, 2019)

# (font, size, version) -> {glyph: dots delta}
OVERRIDES = {
    # "Exhibit A. " -> [(Exhibi)-2(t A. )]
    ("tnr", 14, 2019): {"A": +1},
}


def main():
    OUT.mkdir(parents=True, exist_ok=True)
    for font in BUILTIN_FONTS:
        metrics = load_metrics(font)
        for size in SIZES:
            for version in VERSIONS:
                widths = synthesize_internal_widths(metrics, size, version)
                for g, delta in OVERRIDES.get((font, size, version), {}).items():
                    widths[g] += delta
                table = InternalWidthTable(font, version, size, widths)
                write_internal_table(table, OUT / f"{font}-{size}-{version}.csv")


if __name__ == "__main__":
    main()
