"""Content stream tokenising (via pypdf) and serialisation."""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Iterable, List, Sequence

from pypdf.generic import (
    ArrayObject,
    ByteStringObject,
    ContentStream,
    DictionaryObject,
    FloatObject,
    NameObject,
    NumberObject,
    TextStringObject,
)

from ..errors import MalformedPdf

logger = logging.getLogger(__name__)


class Name(str):
    """A PDF name operand (without the leading slash)."""

    __slots__ = ()


@dataclass(frozen=True)
class Op:
    operator: str
    operands: tuple


def _convert(obj):
    if isinstance(obj, NameObject):
        return Name(str(obj)[1:])
    if isinstance(obj, (TextStringObject,)):
        return bytes(obj.get_original_bytes())
    if isinstance(obj, ByteStringObject):
        return bytes(obj)
    if isinstance(obj, bool):
        return obj
    if isinstance(obj, NumberObject):
        return int(obj)
    if isinstance(obj, FloatObject):
        return float(obj)
    if isinstance(obj, ArrayObject):
        return [_convert(x) for x in obj]
    if isinstance(obj, DictionaryObject):
        return {str(k)[1:]: _convert(v) for k, v in obj.items()}
    if isinstance(obj, (int, float)):
        return obj
    return obj


def parse_operations(data: bytes, pdf=None) -> List[Op]:
    """Tokenise a decoded content stream into operators with plain operands."""
    try:
        stream = ContentStream(None, pdf)
        stream.set_data(data)
        raw = stream.operations
    except Exception as exc:  # pypdf raises a variety of types
        raise MalformedPdf(f"unparseable content stream: {exc}") from exc
    ops = []
    for operands, operator in raw:
        name = operator.decode("latin-1") if isinstance(operator, bytes) else str(operator)
        if name == "INLINE IMAGE":
            ops.append(Op("BI", ()))
            continue
        ops.append(Op(name, tuple(_convert(o) for o in operands)))
    return ops


def _fmt_number(x) -> str:
    if isinstance(x, bool):
        return "true" if x else "false"
    if isinstance(x, int):
        return str(x)
    if float(x).is_integer():
        return str(int(x))
    s = f"{x:.6f}".rstrip("0").rstrip(".")
    return "0" if s in ("-0", "") else s


def _escape(data: bytes) -> bytes:
    out = bytearray(b"(")
    for b in data:
        if b in (0x28, 0x29, 0x5C):
            out += b"\\" + bytes([b])
        elif b < 0x20 or b > 0x7E:
            out += b"\\%03o" % b
        else:
            out.append(b)
    out += b")"
    return bytes(out)


def serialize_operand(x) -> bytes:
    if isinstance(x, Name):
        return b"/" + x.encode("latin-1")
    if isinstance(x, (bytes, bytearray)):
        return _escape(bytes(x))
    if isinstance(x, (int, float)):
        return _fmt_number(x).encode()
    if isinstance(x, (list, tuple)):
        return b"[" + b" ".join(serialize_operand(v) for v in x) + b"]"
    if isinstance(x, dict):
        return b"<<" + b" ".join(b"/" + k.encode() + b" " + serialize_operand(v) for k, v in x.items()) + b">>"
    if x is None:
        return b"null"
    raise TypeError(f"cannot serialise operand {x!r}")


def serialize(ops: Iterable[Op]) -> bytes:
    lines = []
    for op in ops:
        if op.operator == "BI":
            logger.warning("inline image dropped while re-serialising content")
            continue
        parts = [serialize_operand(o) for o in op.operands]
        parts.append(op.operator.encode("latin-1"))
        lines.append(b" ".join(parts))
    return b"\n".join(lines) + b"\n"


def tj_array(chunks: Sequence) -> list:
    """Normalise a TJ operand: merge adjacent strings, drop zero adjustments."""
    out: list = []
    for c in chunks:
        if isinstance(c, (bytes, bytearray)):
            if out and isinstance(out[-1], bytes):
                out[-1] = out[-1] + bytes(c)
            else:
                out.append(bytes(c))
        else:
            if c == 0:
                continue
            if out and not isinstance(out[-1], bytes):
                out[-1] = out[-1] + c
            else:
                out.append(c)
    return out
