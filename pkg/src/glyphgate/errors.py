"""Exception hierarchy shared by every glyphgate module."""


class GlyphGateError(Exception):
    """Base class for all errors raised by glyphgate."""


class MalformedPdf(GlyphGateError):
    pass


class Encrypted(GlyphGateError):
    pass


class UnsupportedEncoding(GlyphGateError):
    pass


class MissingGlyph(GlyphGateError, KeyError):
    def __init__(self, char, font=None):
        self.char = char
        self.font = font
        where = f" in font {font!r}" if font else ""
        super().__init__(f"no width for glyph {char!r}{where}")

    def __str__(self):
        return self.args[0]


class MissingInternalTable(GlyphGateError):
    pass


class CombinatoricBudgetExceeded(GlyphGateError):
    pass


class SideChannelAbsent(GlyphGateError):
    pass


class DegenerateSite(GlyphGateError):
    pass


class EmptyMatchSet(GlyphGateError):
    pass


class EmptyDict(GlyphGateError):
    pass


class InvalidDpi(GlyphGateError, ValueError):
    pass


class InvalidInterval(GlyphGateError, ValueError):
    pass


class RegressionDetected(GlyphGateError):
    """A repair increased the measured leakage of a redaction."""

    def __init__(self, message, report=None):
        super().__init__(message)
        self.report = report
