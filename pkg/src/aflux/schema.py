"""Keyword catalog: loading, lookup and rendering of the schema document."""

from __future__ import annotations

import enum
import json
import re
from dataclasses import dataclass, fields
from functools import lru_cache
from importlib import resources
from types import MappingProxyType
from typing import Iterator, Mapping

from .errors import DuplicateKeywordError, SchemaParseError, UnknownKeywordError

_NAME_RE = re.compile(r"[A-Za-z_][A-Za-z0-9_]*\Z")


class Kind(str, enum.Enum):
    SCALAR_NUMBER = "scalar-number"
    NUMBER_LIST = "number-list"
    SCALAR_STRING = "scalar-string"
    STRING_LIST = "string-list"
    MATRIX = "matrix"
    KPOINTS = "kpoints"

    @property
    def is_numeric(self) -> bool:
        return self in (Kind.SCALAR_NUMBER, Kind.NUMBER_LIST)

    @property
    def is_string(self) -> bool:
        return self in (Kind.SCALAR_STRING, Kind.STRING_LIST)

    @property
    def is_list(self) -> bool:
        return self in (Kind.NUMBER_LIST, Kind.STRING_LIST)

    @property
    def comparable(self) -> bool:
        return self.is_numeric or self.is_string

    def __str__(self) -> str:
        return self.value


class Status(str, enum.Enum):
    PRODUCTION = "production"
    DEPRECATED = "deprecated"

    def __str__(self) -> str:
        return self.value


@dataclass(frozen=True)
class Keyword:
    name: str
    kind: Kind
    units: str = ""
    title: str = ""
    description: str = ""
    status: Status = Status.PRODUCTION

    def to_json(self) -> dict:
        return {
            "name": self.name,
            "kind": self.kind.value,
            "units": self.units,
            "title": self.title,
            "description": self.description,
            "status": self.status.value,
        }


_REQUIRED_FIELDS = tuple(f.name for f in fields(Keyword))


class KeywordRegistry(Mapping[str, Keyword]):
    """Immutable, ordered name -> :class:`Keyword` map."""

    __slots__ = ("_entries", "_source")

    def __init__(self, keywords=(), source: str = "embedded"):
        entries: dict[str, Keyword] = {}
        for kw in keywords:
            if kw.name in entries:
                raise DuplicateKeywordError(kw.name)
            entries[kw.name] = kw
        object.__setattr__(self, "_entries", MappingProxyType(entries))
        object.__setattr__(self, "_source", source)

    def __setattr__(self, name, value):
        raise AttributeError("KeywordRegistry is immutable")

    @property
    def source(self) -> str:
        return self._source

    @property
    def entries(self) -> Mapping[str, Keyword]:
        return self._entries

    def __getitem__(self, name: str) -> Keyword:
        return self.lookup(name)

    def __iter__(self) -> Iterator[str]:
        return iter(self._entries)

    def __len__(self) -> int:
        return len(self._entries)

    def __contains__(self, name) -> bool:
        return name in self._entries

    def __repr__(self) -> str:
        return f"<KeywordRegistry {len(self)} keywords ({self._source})>"

    def lookup(self, name: str) -> Keyword:
        try:
            return self._entries[name]
        except KeyError:
            raise UnknownKeywordError(name, closest_names(name, self._entries)) from None


def edit_distance(a: str, b: str) -> int:
    """Levenshtein distance with unit costs."""
    if len(a) < len(b):
        a, b = b, a
    previous = list(range(len(b) + 1))
    for i, ca in enumerate(a, 1):
        current = [i]
        for j, cb in enumerate(b, 1):
            current.append(min(previous[j] + 1,
                               current[j - 1] + 1,
                               previous[j - 1] + (ca != cb)))
        previous = current
    return previous[-1]


def closest_names(name: str, candidates, n: int = 3) -> tuple[str, ...]:
    ranked = sorted(candidates, key=lambda c: (edit_distance(name, c), c))
    return tuple(ranked[:n])


def lookup(registry: KeywordRegistry, name: str) -> Keyword:
    return registry.lookup(name)


def _byte_offset(text: str, char_offset: int) -> int:
    return len(text[:char_offset].encode("utf-8"))


def _descriptor(obj, text: str, start: int) -> Keyword:
    offset = _byte_offset(text, start)
    if not isinstance(obj, dict):
        raise SchemaParseError("keyword descriptor must be an object", offset)
    missing = [f for f in _REQUIRED_FIELDS if f not in obj]
    if missing:
        raise SchemaParseError(f"descriptor missing field(s) {', '.join(missing)}", offset)
    for f in _REQUIRED_FIELDS:
        if not isinstance(obj[f], str):
            raise SchemaParseError(f"descriptor field {f!r} must be a string", offset)
    if not _NAME_RE.match(obj["name"]):
        raise SchemaParseError(f"invalid keyword name {obj['name']!r}", offset)
    try:
        kind = Kind(obj["kind"])
    except ValueError:
        raise SchemaParseError(f"unknown kind {obj['kind']!r} for {obj['name']}", offset) from None
    try:
        status = Status(obj["status"])
    except ValueError:
        raise SchemaParseError(f"unknown status {obj['status']!r} for {obj['name']}", offset) from None
    return Keyword(obj["name"], kind, obj["units"], obj["title"], obj["description"], status)


def load_schema(document: bytes | str, source: str = "embedded") -> KeywordRegistry:
    """Parse a schema document (a JSON array of keyword descriptors).

    Descriptors are decoded one at a time so that errors can point at the
    byte offset of the element that caused them.
    """
    if isinstance(document, (bytes, bytearray)):
        try:
            text = bytes(document).decode("utf-8")
        except UnicodeDecodeError as exc:
            raise SchemaParseError("schema is not valid UTF-8", exc.start) from None
    else:
        text = document

    decoder = json.JSONDecoder()
    ws = re.compile(r"[ \t\n\r]*")

    def skip(i: int) -> int:
        return ws.match(text, i).end()

    i = skip(0)
    if i >= len(text) or text[i] != "[":
        raise SchemaParseError("schema must be a JSON array", _byte_offset(text, i))
    i = skip(i + 1)
    keywords: list[Keyword] = []
    seen: set[str] = set()
    if i < len(text) and text[i] == "]":
        i += 1
    else:
        while True:
            try:
                obj, end = decoder.raw_decode(text, i)
            except json.JSONDecodeError as exc:
                raise SchemaParseError(exc.msg, _byte_offset(text, exc.pos)) from None
            kw = _descriptor(obj, text, i)
            if kw.name in seen:
                raise DuplicateKeywordError(kw.name)
            seen.add(kw.name)
            keywords.append(kw)
            i = skip(end)
            if i < len(text) and text[i] == ",":
                i = skip(i + 1)
                continue
            if i < len(text) and text[i] == "]":
                i += 1
                break
            raise SchemaParseError("expected ',' or ']'", _byte_offset(text, i))
    if skip(i) != len(text):
        raise SchemaParseError("trailing data after schema array", _byte_offset(text, skip(i)))
    return KeywordRegistry(keywords, source=source)


def dump_schema(registry: KeywordRegistry) -> bytes:
    return json.dumps([kw.to_json() for kw in registry.values()], indent=1).encode("utf-8")


def render_catalog(registry: KeywordRegistry) -> str:
    """Human-readable listing, one block per keyword, sorted by name."""
    return "\n".join(render_keyword(registry[name]) for name in sorted(registry))


def render_keyword(kw: Keyword) -> str:
    lines = [kw.name]
    if kw.title:
        lines.append(f"  title:  {kw.title}")
    lines.append(f"  kind:   {kw.kind.value}")
    lines.append(f"  units:  {kw.units or '-'}")
    if kw.status is not Status.PRODUCTION:
        lines.append(f"  status: {kw.status.value}")
    if kw.description:
        lines.append(f"  {kw.description}")
    return "\n".join(lines) + "\n"


def bundled_schema_bytes() -> bytes:
    return resources.files("aflux").joinpath("data/schema.json").read_bytes()


@lru_cache(maxsize=1)
def bundled_registry() -> KeywordRegistry:
    return load_schema(bundled_schema_bytes(), source="embedded")
