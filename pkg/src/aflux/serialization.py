"""Decoding and encoding of AFLOW's raw property strings.

Every property arrives as a single string whose layout depends on the
keyword kind::

    scalar-number   6.2
    number-list     1,1,2
    scalar-string   Ag1Al1
    string-list     Ag,Al
    matrix          0,0,0;1.5691,1.5691,1.5691
    kpoints         10,10,10;16,16,16;G-X,X-W;20

Separators are never padded with whitespace.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from typing import Union

import numpy as np

from .errors import DecodeError, EmptyValueError, ShapeError, ValueTypeError
from .schema import Kind

NUMBER_RE = re.compile(r"-?(?:\d+(?:\.\d*)?|\.\d+)(?:[eE][+-]?\d+)?")
_INT_RE = re.compile(r"\d+")
_LABEL_RE = re.compile(r"[A-Za-z0-9]+-[A-Za-z0-9]+")


def parse_number(token: str) -> float | None:
    """Return the float for a decimal token, or None if it is not one."""
    if NUMBER_RE.fullmatch(token) is None:
        return None
    return float(token)


def format_number(x: float) -> str:
    """Shortest round-trip rendering, without exponent for typical magnitudes."""
    x = float(x)
    if not math.isfinite(x):
        raise ValueTypeError(f"cannot encode non-finite number {x!r}")
    if x == 0:
        return "-0" if math.copysign(1.0, x) < 0 else "0"
    if x.is_integer() and abs(x) < 1e16:
        return str(int(x))
    return repr(x)


@dataclass(frozen=True)
class Number:
    value: float

    def __post_init__(self):
        object.__setattr__(self, "value", float(self.value))

    @property
    def native(self):
        return self.value


@dataclass(frozen=True)
class NumberList:
    values: tuple[float, ...]

    def __post_init__(self):
        object.__setattr__(self, "values", tuple(float(v) for v in self.values))

    @property
    def native(self):
        return np.array(self.values, dtype=float)


@dataclass(frozen=True)
class Text:
    value: str

    @property
    def native(self):
        return self.value


@dataclass(frozen=True)
class TextList:
    values: tuple[str, ...]

    def __post_init__(self):
        object.__setattr__(self, "values", tuple(self.values))

    @property
    def native(self):
        return list(self.values)


@dataclass(frozen=True)
class Matrix:
    rows: tuple[tuple[float, ...], ...]

    def __post_init__(self):
        object.__setattr__(self, "rows", tuple(tuple(float(v) for v in r) for r in self.rows))
        widths = {len(r) for r in self.rows}
        if len(widths) > 1:
            raise ShapeError("matrix", 0, "", f"ragged rows of widths {sorted(widths)}:")

    @property
    def shape(self) -> tuple[int, int]:
        return (len(self.rows), len(self.rows[0]) if self.rows else 0)

    @property
    def native(self):
        return np.array(self.rows, dtype=float)


@dataclass(frozen=True)
class Kpoints:
    relaxation_grid: tuple[int, int, int]
    static_grid: tuple[int, int, int] | None
    band_path: tuple[str, ...]
    points_per_segment: int

    def __post_init__(self):
        object.__setattr__(self, "relaxation_grid", tuple(self.relaxation_grid))
        if self.static_grid is not None:
            object.__setattr__(self, "static_grid", tuple(self.static_grid))
        object.__setattr__(self, "band_path", tuple(self.band_path))

    @property
    def native(self):
        return self

    def to_json(self) -> dict:
        return {
            "relaxation_grid": list(self.relaxation_grid),
            "static_grid": list(self.static_grid) if self.static_grid else None,
            "band_path": list(self.band_path),
            "points_per_segment": self.points_per_segment,
        }


TypedValue = Union[Number, NumberList, Text, TextList, Matrix, Kpoints]

_VALUE_TYPE = {
    Kind.SCALAR_NUMBER: Number,
    Kind.NUMBER_LIST: NumberList,
    Kind.SCALAR_STRING: Text,
    Kind.STRING_LIST: TextList,
    Kind.MATRIX: Matrix,
    Kind.KPOINTS: Kpoints,
}


def _split(raw: str, sep: str, base: int = 0):
    """Yield (offset, token) pairs for ``raw`` split on ``sep``."""
    pos = 0
    for token in raw.split(sep):
        yield base + pos, token
        pos += len(token) + 1


def _numbers(kind: Kind, raw: str, base: int = 0) -> tuple[float, ...]:
    out = []
    for offset, token in _split(raw, ",", base):
        value = parse_number(token)
        if value is None:
            raise DecodeError(kind.value, offset, token)
        out.append(value)
    return tuple(out)


def _grid(raw: str, base: int) -> tuple[int, int, int]:
    parts = list(_split(raw, ",", base))
    if len(parts) != 3:
        raise DecodeError("kpoints", base, raw, "grid needs three integers, got")
    grid = []
    for offset, token in parts:
        if not _INT_RE.fullmatch(token) or int(token) <= 0:
            raise DecodeError("kpoints", offset, token, "grid entry must be a positive integer, got")
        grid.append(int(token))
    return tuple(grid)


def _decode_kpoints(raw: str) -> Kpoints:
    sections = list(_split(raw, ";"))
    if len(sections) != 4:
        raise DecodeError("kpoints", 0, raw, "expected 4 ';'-separated sections in")
    (o_relax, relax), (o_static, static), (o_path, path), (o_n, n) = sections
    relaxation = _grid(relax, o_relax)
    static_grid = _grid(static, o_static) if static else None
    labels = []
    for offset, seg in _split(path, ",", o_path):
        if not _LABEL_RE.fullmatch(seg):
            raise DecodeError("kpoints", offset, seg, "bad path segment")
        labels.append(seg)
    if not _INT_RE.fullmatch(n) or int(n) <= 0:
        raise DecodeError("kpoints", o_n, n, "points per segment must be a positive integer, got")
    return Kpoints(relaxation, static_grid, tuple(labels), int(n))


def decode(kind: Kind | str, raw: str) -> TypedValue:
    kind = Kind(kind)
    if not raw:
        raise EmptyValueError(kind.value)
    if kind is Kind.SCALAR_NUMBER:
        value = parse_number(raw)
        if value is None:
            raise DecodeError(kind.value, 0, raw)
        return Number(value)
    if kind is Kind.NUMBER_LIST:
        return NumberList(_numbers(kind, raw))
    if kind is Kind.SCALAR_STRING:
        return Text(raw)
    if kind is Kind.STRING_LIST:
        items = []
        for offset, token in _split(raw, ","):
            if not token or token != token.strip():
                raise DecodeError(kind.value, offset, token)
            items.append(token)
        return TextList(tuple(items))
    if kind is Kind.MATRIX:
        rows = [(_numbers(kind, row, offset), offset) for offset, row in _split(raw, ";")]
        width = len(rows[0][0])
        for values, offset in rows:
            if len(values) != width:
                raise ShapeError(kind.value, offset, raw[offset:offset + 40],
                                 f"row has {len(values)} columns, expected {width}:")
        return Matrix(tuple(values for values, _ in rows))
    return _decode_kpoints(raw)


def _check_text(kind: Kind, s: str, forbidden: str = "") -> str:
    if not isinstance(s, str) or not s:
        raise ValueTypeError(f"{kind.value} needs non-empty strings, got {s!r}")
    if any(c in s for c in forbidden) or s != s.strip():
        raise ValueTypeError(f"{kind.value} element {s!r} cannot be serialized")
    return s


def encode(kind: Kind | str, value: TypedValue) -> str:
    """Render ``value`` so that ``decode(kind, encode(kind, value)) == value``."""
    kind = Kind(kind)
    expected = _VALUE_TYPE[kind]
    if not isinstance(value, expected):
        raise ValueTypeError(f"{kind.value} expects {expected.__name__}, got {type(value).__name__}")
    if kind is Kind.SCALAR_NUMBER:
        return format_number(value.value)
    if kind is Kind.NUMBER_LIST:
        if not value.values:
            raise ValueTypeError("number-list cannot be empty")
        return ",".join(format_number(v) for v in value.values)
    if kind is Kind.SCALAR_STRING:
        return _check_text(kind, value.value)
    if kind is Kind.STRING_LIST:
        if not value.values:
            raise ValueTypeError("string-list cannot be empty")
        return ",".join(_check_text(kind, s, ",") for s in value.values)
    if kind is Kind.MATRIX:
        if not value.rows or not value.rows[0]:
            raise ValueTypeError("matrix cannot be empty")
        return ";".join(",".join(format_number(v) for v in row) for row in value.rows)

    def grid(g):
        if len(g) != 3 or any(not isinstance(i, int) or i <= 0 for i in g):
            raise ValueTypeError(f"kpoints grid must be three positive integers, got {g!r}")
        return ",".join(str(i) for i in g)

    if not value.band_path or any(not _LABEL_RE.fullmatch(s) for s in value.band_path):
        raise ValueTypeError(f"bad kpoints band path {value.band_path!r}")
    if not isinstance(value.points_per_segment, int) or value.points_per_segment <= 0:
        raise ValueTypeError("kpoints points per segment must be a positive integer")
    static = grid(value.static_grid) if value.static_grid is not None else ""
    return ";".join([grid(value.relaxation_grid), static,
                     ",".join(value.band_path), str(value.points_per_segment)])


def to_jsonable(value: TypedValue):
    """Plain JSON-compatible form of a decoded value."""
    if isinstance(value, (Number, Text)):
        return value.value
    if isinstance(value, (NumberList, TextList)):
        return list(value.values)
    if isinstance(value, Matrix):
        return [list(r) for r in value.rows]
    return value.to_json()
