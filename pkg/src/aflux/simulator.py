"""Offline AFLUX endpoint backed by a JSON fixture dataset.

Routes::

    GET /API/?<summons>               JSON {rank: record}, header X-AFLUX-Matches
    GET /API/schema                   the keyword schema document
    GET /AFLOWDATA/<path>?<keyword>   raw property string (text/plain)
"""

from __future__ import annotations

import contextlib
import json
import logging
import threading
from dataclasses import dataclass, field
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from importlib import resources
from typing import Iterator
from urllib.parse import unquote, urlsplit

from . import serialization
from .errors import AfluxError, DatasetError, ProtocolError
from .expr import check_leaf, leaves, matches
from .matchbook import MatchbookEntry, QueryPlan, parse_summons, unquote_summons
from .schema import Kind, KeywordRegistry, bundled_schema_bytes, dump_schema, load_schema
from .urls import aurl_path

log = logging.getLogger(__name__)

RECORD_FIELDS = ("auid", "aurl", "compound")
MATCHES_HEADER = "X-AFLUX-Matches"


@dataclass
class Record:
    auid: str
    aurl: str
    compound: str
    properties: dict[str, str]
    decoded: dict[str, serialization.TypedValue] = field(default_factory=dict, repr=False)

    def raw(self, keyword: str) -> str | None:
        if keyword in RECORD_FIELDS:
            return getattr(self, keyword)
        return self.properties.get(keyword)

    def comparable(self, keyword: str):
        """Decoded value in the shape :func:`aflux.expr.matches` expects."""
        value = self.decoded.get(keyword)
        if value is None:
            return None
        if isinstance(value, (serialization.Number, serialization.Text)):
            return value.value
        if isinstance(value, (serialization.NumberList, serialization.TextList)):
            return value.values
        raise ProtocolError(f"{keyword} values cannot be compared")


class Dataset:
    def __init__(self, records, schema: KeywordRegistry, schema_bytes: bytes | None = None):
        self.records: tuple[Record, ...] = tuple(records)
        self.schema = schema
        self.schema_bytes = schema_bytes if schema_bytes is not None else dump_schema(schema)
        self.by_path = {aurl_path(r.aurl): r for r in self.records}
        self.by_auid = {r.auid: r for r in self.records}

    def __len__(self):
        return len(self.records)


def load_dataset(data: bytes | str, schema: KeywordRegistry | None = None,
                 schema_bytes: bytes | None = None) -> Dataset:
    """Parse and eagerly validate a fixture dataset."""
    if schema is None:
        schema_bytes = schema_bytes or bundled_schema_bytes()
        schema = load_schema(schema_bytes)
    try:
        items = json.loads(data)
    except json.JSONDecodeError as exc:
        raise DatasetError(f"invalid JSON: {exc}") from None
    if not isinstance(items, list):
        raise DatasetError("dataset must be a JSON array of records")
    records = []
    seen_auids: set[str] = set()
    seen_paths: set[str] = set()
    for index, item in enumerate(items):
        where = item.get("auid", index) if isinstance(item, dict) else index
        if not isinstance(item, dict):
            raise DatasetError("record must be an object", where)
        for name in RECORD_FIELDS:
            if not isinstance(item.get(name), str) or not item[name]:
                raise DatasetError("missing or empty string field", where, name)
        props = item.get("properties", {})
        if not isinstance(props, dict):
            raise DatasetError("properties must be an object", where, "properties")
        if item["auid"] in seen_auids:
            raise DatasetError("duplicate auid", where, "auid")
        seen_auids.add(item["auid"])
        path = aurl_path(item["aurl"])
        if path in seen_paths:
            raise DatasetError("duplicate aurl", where, "aurl")
        seen_paths.add(path)
        record = Record(item["auid"], item["aurl"], item["compound"], {})
        for name in RECORD_FIELDS:
            if name in schema:
                record.decoded[name] = _decode(schema, name, item[name], where)
        for name, raw in props.items():
            if name in RECORD_FIELDS:
                raise DatasetError("record field repeated inside properties", where, name)
            if name not in schema:
                raise DatasetError("unknown keyword", where, name)
            if not isinstance(raw, str):
                raise DatasetError("raw value must be a string", where, name)
            record.properties[name] = raw
            record.decoded[name] = _decode(schema, name, raw, where)
        records.append(record)
    return Dataset(records, schema, schema_bytes)


def _decode(schema, name, raw, where):
    try:
        return serialization.decode(schema[name].kind, raw)
    except AfluxError as exc:
        raise DatasetError(f"undecodable value: {exc}", where, name) from None


def bundled_dataset_bytes() -> bytes:
    return resources.files("aflux").joinpath("data/fixtures.json").read_bytes()


def bundled_dataset() -> Dataset:
    return load_dataset(bundled_dataset_bytes())


@dataclass(frozen=True)
class Evaluation:
    records: list[Record]   # the requested page, in rank order
    first_rank: int         # 1-based rank of records[0]
    visible: list[str]
    total: int


def _check_plan(d: Dataset, plan: QueryPlan) -> None:
    for entry in plan.entries():
        if entry.keyword not in d.schema:
            raise ProtocolError(f"unknown keyword {entry.keyword!r}")
        if entry.filter is None:
            continue
        kw = d.schema[entry.keyword]
        for leaf in leaves(entry.filter):
            reason = check_leaf(leaf, kw)
            if reason:
                raise ProtocolError(reason)


def _item_matches(item, record: Record) -> bool:
    if isinstance(item, MatchbookEntry):
        return item.filter is None or matches(item.filter, record.comparable)
    if item.op == "and":
        return all(_item_matches(i, record) for i in item.items)
    return any(_item_matches(i, record) for i in item.items)


def _sort_key(kind: Kind, value):
    if isinstance(value, (serialization.Number, serialization.Text)):
        return value.value
    if isinstance(value, (serialization.NumberList, serialization.TextList)):
        return value.values
    # matrix and kpoints order by their canonical raw bytes
    return serialization.encode(kind, value).encode("utf-8")


def match_order(d: Dataset, plan: QueryPlan) -> list[Record]:
    """All matching records in rank order (before paging)."""
    _check_plan(d, plan)
    hits = [r for r in d.records if all(_item_matches(i, r) for i in plan.matchbook)]
    key = plan.order_keyword
    kind = d.schema[key].kind
    present = sorted((r for r in hits if key in r.decoded), key=lambda r: r.auid)
    absent = sorted((r for r in hits if key not in r.decoded), key=lambda r: r.auid)
    # stable sort keeps auid order among equal values in both directions
    present.sort(key=lambda r: _sort_key(kind, r.decoded[key]), reverse=plan.descending)
    return present + absent


def evaluate(d: Dataset, plan: QueryPlan) -> Evaluation:
    ordered = match_order(d, plan)
    start = (plan.page_number - 1) * plan.page_size
    page = ordered[start:start + plan.page_size]
    return Evaluation(page, start + 1, plan.visible_keywords(), len(ordered))


def project(record: Record, visible) -> dict:
    out = {name: getattr(record, name) for name in RECORD_FIELDS}
    for name in visible:
        raw = record.raw(name)
        if raw is not None and name not in out:
            out[name] = raw
    return out


def handle(d: Dataset, method: str, path: str, query: str = "") -> tuple[int, dict, bytes]:
    """Route one request; returns (status, headers, body)."""
    if method != "GET":
        return _text(405, f"method {method} not allowed")
    path = unquote(path)
    if path in ("/API", "/API/"):
        return _search(d, unquote_summons(query))
    if path in ("/API/schema", "/API/schema/"):
        return 200, {"Content-Type": "application/json"}, d.schema_bytes
    if path.startswith("/AFLOWDATA/"):
        record = d.by_path.get(path.lstrip("/").rstrip("/"))
        if record is None:
            return _text(404, f"no entry at {path}")
        keyword = unquote(query)
        if not keyword:
            return _text(400, "request a property as ?<keyword>")
        raw = record.raw(keyword)
        if raw is None:
            return _text(404, f"{record.auid} has no property {keyword!r}")
        return 200, {"Content-Type": "text/plain; charset=utf-8"}, raw.encode("utf-8")
    return _text(404, f"no route for {path}")


def _text(status: int, message: str) -> tuple[int, dict, bytes]:
    return status, {"Content-Type": "text/plain; charset=utf-8"}, message.encode("utf-8")


def _search(d: Dataset, summons: str) -> tuple[int, dict, bytes]:
    try:
        plan = parse_summons(summons, d.schema)
        result = evaluate(d, plan)
    except AfluxError as exc:
        return _text(400, str(exc))
    body = {str(result.first_rank + i): project(r, result.visible)
            for i, r in enumerate(result.records)}
    headers = {"Content-Type": "application/json", MATCHES_HEADER: str(result.total)}
    return 200, headers, json.dumps(body).encode("utf-8")


class _Handler(BaseHTTPRequestHandler):
    dataset: Dataset
    protocol_version = "HTTP/1.1"

    def do_GET(self):
        parts = urlsplit(self.path)
        status, headers, body = handle(self.server.dataset, "GET", parts.path, parts.query)
        self.send_response(status)
        for name, value in headers.items():
            self.send_header(name, value)
        self.send_header("Content-Length", str(len(body)))
        self.end_headers()
        self.wfile.write(body)

    def log_message(self, format, *args):
        log.debug("%s - " + format, self.address_string(), *args)


class SimulatorServer(ThreadingHTTPServer):
    daemon_threads = True

    def __init__(self, dataset: Dataset, host: str = "127.0.0.1", port: int = 0):
        self.dataset = dataset
        super().__init__((host, port), _Handler)

    @property
    def root(self) -> str:
        host, port = self.server_address[:2]
        return f"http://{host}:{port}/API/"


@contextlib.contextmanager
def running(dataset: Dataset | None = None, host: str = "127.0.0.1", port: int = 0) -> Iterator[SimulatorServer]:
    """Serve ``dataset`` on a background thread for the duration of the block."""
    server = SimulatorServer(dataset if dataset is not None else bundled_dataset(), host, port)
    thread = threading.Thread(target=server.serve_forever, name="aflux-simulator", daemon=True)
    thread.start()
    try:
        yield server
    finally:
        server.shutdown()
        server.server_close()
        thread.join()
