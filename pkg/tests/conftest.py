import sys

import pytest


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance") or sys.modules.get("tests.test_acceptance")
    results = getattr(mod, "RESULTS", None)
    if not results:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(results):
        terminalreporter.write_line(results[n])


@pytest.fixture(scope="session")
def last_names():
    from glyphgate.dictionaries import name_dictionary
    return name_dictionary("last")


@pytest.fixture(scope="session")
def small_corpus():
    """Five documents per (scheme, font) for the common fonts, parsed."""
    from glyphgate.corpus import gen_corpus
    from glyphgate.pdf.parse import parse_document
    out = {}
    for scheme in ("unadjusted", "word2007", "word2019", "ocr"):
        for font in ("tnr", "courier"):
            out[scheme, font] = [(pdf, truth, parse_document(pdf))
                                 for pdf, truth in gen_corpus(5, scheme, font, 12, seed=11)]
    return out
