"""Chainable queries, lazily paged result sets and lazily populated entries."""

from __future__ import annotations

import json
import os
import threading
from dataclasses import dataclass, field, replace
from typing import Iterator

from .errors import MissingPropertyError, ProtocolError, UsageError, ValidationError
from .expr import And, FilterExpr, validate
from .matchbook import QueryPlan, encode_summons, plan_from_query
from .schema import Keyword, KeywordRegistry, bundled_registry
from .serialization import TypedValue, decode
from .structure import AtomicStructure, export, to_structure
from .transport import Transport
from .urls import entry_url, search_url

DEFAULT_ROOT = "http://aflowlib.duke.edu/search/API/"
MATCHES_HEADER = "X-AFLUX-Matches"


def default_root() -> str:
    return os.environ.get("AFLUX_ROOT") or DEFAULT_ROOT


def _keyword_name(key) -> str:
    if isinstance(key, str):
        return key
    if isinstance(key, Keyword):
        return key.name
    name = getattr(key, "name", None)
    if isinstance(name, str):
        return name
    raise TypeError(f"expected a keyword or keyword name, got {key!r}")


@dataclass(frozen=True)
class Query:
    """An immutable search request; every refinement returns a new Query.

    Iterating, indexing or taking ``len()`` of a query executes it once and
    reuses the resulting :class:`ResultSet`.
    """

    root: str
    registry: KeywordRegistry = field(repr=False, compare=False)
    transport: Transport = field(repr=False, compare=False)
    selects: tuple[str, ...] = ()
    excludes: tuple[str, ...] = ()
    filter_expr: FilterExpr | None = None
    order: tuple[str, bool] | None = None
    page_size: int = 100
    _results: ResultSet | None = field(default=None, init=False, repr=False, compare=False)

    def _known(self, keys) -> tuple[str, ...]:
        names = tuple(_keyword_name(k) for k in keys)
        for name in names:
            self.registry.lookup(name)
        return names

    def select(self, *keys) -> Query:
        names = self._known(keys)
        return replace(self, selects=tuple(dict.fromkeys(self.selects + names)))

    def exclude(self, *keys) -> Query:
        names = self._known(keys)
        return replace(self, excludes=tuple(dict.fromkeys(self.excludes + names)))

    def filter(self, expr: FilterExpr) -> Query:
        issues = validate(expr, self.registry)
        if issues:
            raise ValidationError(issues)
        combined = expr if self.filter_expr is None else And(self.filter_expr, expr)
        return replace(self, filter_expr=combined)

    def orderby(self, key, reverse: bool = False) -> Query:
        (name,) = self._known([key])
        return replace(self, order=(name, bool(reverse)))

    def plan(self, page: int = 1) -> QueryPlan:
        if not self.selects and self.filter_expr is None:
            raise UsageError("a query needs at least one select or filter before it can run")
        return plan_from_query(self.selects, self.excludes, self.filter_expr, self.order,
                               page, self.page_size)

    def summons(self, page: int = 1) -> str:
        return encode_summons(self.plan(page))

    def url(self, page: int = 1) -> str:
        return search_url(self.root, self.summons(page))

    def execute(self) -> ResultSet:
        """Run the query now, fetching its first page."""
        return ResultSet(self)

    @property
    def results(self) -> ResultSet:
        if self._results is None:
            object.__setattr__(self, "_results", self.execute())
        return self._results

    def __iter__(self) -> Iterator[Entry]:
        return iter(self.results)

    def __getitem__(self, index):
        return self.results[index]

    def __len__(self) -> int:
        return len(self.results)


def search(root: str | None = None, page_size: int = 100, *, batch_size: int | None = None,
           registry: KeywordRegistry | None = None, transport: Transport | None = None) -> Query:
    """Start an empty query against ``root`` (``$AFLUX_ROOT`` by default)."""
    if batch_size is not None:
        page_size = batch_size
    if not isinstance(page_size, int) or page_size < 1:
        raise UsageError(f"page size must be a positive integer, got {page_size!r}")
    return Query(root or default_root(),
                 registry if registry is not None else bundled_registry(),
                 transport if transport is not None else Transport(),
                 page_size=page_size)


class ResultSet:
    """Ordered, lazily paged view of a query's matches.

    Pages are fetched on first access and kept; ``total`` comes from the
    first response so negative indices and slices work without paging to
    the end.
    """

    def __init__(self, query: Query):
        self.query = query
        self._pages: dict[int, list[Entry]] = {}
        self._lock = threading.RLock()
        self.total: int = 0
        self._page(1)

    @property
    def page_size(self) -> int:
        return self.query.page_size

    @property
    def pages_loaded(self) -> list[int]:
        return sorted(self._pages)

    def _page(self, number: int) -> list[Entry]:
        with self._lock:
            if number in self._pages:
                return self._pages[number]
            q = self.query
            response = q.transport.fetch(q.url(number))
            if response.status != 200:
                raise ProtocolError(f"search returned HTTP {response.status}: "
                                    f"{response.body.decode('utf-8', 'replace')}")
            header = response.header(MATCHES_HEADER)
            try:
                total = int(header)
                body = json.loads(response.body)
                if not isinstance(body, dict):
                    raise ValueError("body is not an object")
                ranked = sorted((int(rank), record) for rank, record in body.items())
            except (TypeError, ValueError) as exc:
                raise ProtocolError(f"malformed search response: {exc}") from None
            first = (number - 1) * q.page_size + 1
            expected = list(range(first, min(first + q.page_size, total + 1)))
            if [rank for rank, _ in ranked] != expected:
                raise ProtocolError(f"page {number} returned ranks {[r for r, _ in ranked]}, "
                                    f"expected {expected[:1]}..{expected[-1:]}")
            entries = [Entry.from_record(rec, q.root, q.registry, q.transport) for _, rec in ranked]
            if number == 1:
                self.total = total
            self._pages[number] = entries
            return entries

    def __len__(self) -> int:
        return self.total

    def at(self, index: int) -> Entry:
        if not -self.total <= index < self.total:
            raise IndexError(f"index {index} out of range for {self.total} results")
        if index < 0:
            index += self.total
        page, offset = divmod(index, self.page_size)
        return self._page(page + 1)[offset]

    def slice(self, start: int, stop: int) -> list[Entry]:
        if not 0 <= start <= stop <= self.total:
            raise IndexError(f"slice [{start}:{stop}] out of range for {self.total} results")
        return [self.at(i) for i in range(start, stop)]

    def __getitem__(self, index):
        if isinstance(index, slice):
            return [self.at(i) for i in range(*index.indices(self.total))]
        return self.at(index)

    def __iter__(self) -> Iterator[Entry]:
        for i in range(self.total):
            yield self.at(i)

    def __repr__(self) -> str:
        return f"<ResultSet {self.total} matches, pages {self.pages_loaded}>"


class Entry:
    """One database record.

    Properties that were not part of the original request are fetched from
    the entry's own URL on first access and memoized. Attribute access
    (``entry.Egap``) returns plain Python/numpy values; :meth:`value`
    returns the typed form.
    """

    def __init__(self, auid: str, aurl: str, raw: dict[str, str], *, root: str,
                 registry: KeywordRegistry, transport: Transport):
        self.auid = auid
        self.aurl = aurl
        self.raw = dict(raw)
        self._root = root
        self._registry = registry
        self._transport = transport
        self._decoded: dict[str, TypedValue] = {}
        self._lock = threading.RLock()

    @classmethod
    def from_record(cls, record: dict, root: str, registry: KeywordRegistry,
                    transport: Transport) -> Entry:
        try:
            auid, aurl = record["auid"], record["aurl"]
        except (KeyError, TypeError):
            raise ProtocolError(f"record without auid/aurl: {record!r}") from None
        raw = {k: v for k, v in record.items() if isinstance(v, str)}
        return cls(auid, aurl, raw, root=root, registry=registry, transport=transport)

    def _fetch_raw(self, keyword: str) -> str:
        response = self._transport.fetch(entry_url(self._root, self.aurl, keyword))
        if response.status == 404:
            raise MissingPropertyError(keyword, self.aurl)
        if response.status != 200:
            raise ProtocolError(f"property request returned HTTP {response.status}")
        return response.body.decode("utf-8")

    def value(self, keyword) -> TypedValue:
        name = _keyword_name(keyword)
        kw = self._registry.lookup(name)
        with self._lock:
            if name in self._decoded:
                return self._decoded[name]
            if name not in self.raw:
                self.raw[name] = self._fetch_raw(name)
            value = self._decoded[name] = decode(kw.kind, self.raw[name])
            return value

    def has(self, keyword) -> bool:
        try:
            self.value(keyword)
        except MissingPropertyError:
            return False
        return True

    def __getattr__(self, name: str):
        if name.startswith("_") or name not in self._registry:
            raise AttributeError(f"{type(self).__name__!s} has no attribute {name!r}")
        return self.value(name).native

    def __dir__(self):
        return sorted(set(super().__dir__()) | set(self._registry))

    def structure(self) -> AtomicStructure:
        return to_structure(self)

    atoms = structure

    def export(self, format: str) -> str:
        return export(self.structure(), format)

    def __repr__(self) -> str:
        return f"<aflux.Entry {self.auid}>"
