"""Command-line interface: ``aflux query|keywords|fetch|serve``."""

from __future__ import annotations

import argparse
import csv
import json
import logging
import sys

from .dsl import DslSyntaxError, parse_filter_dsl
from .errors import (AfluxError, MissingPropertyError, ProtocolError, TransportError,
                     UnknownKeywordError)
from .expr import Op, compare
from .results import default_root, search
from .schema import bundled_registry, load_schema, render_catalog, render_keyword
from .serialization import to_jsonable
from .simulator import SimulatorServer, bundled_dataset, load_dataset
from .transport import Transport
from .urls import schema_url

EXIT_OK, EXIT_USAGE, EXIT_REMOTE = 0, 1, 2
_REMOTE_ERRORS = (TransportError, ProtocolError, MissingPropertyError)


class _ArgumentParser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    parser = _ArgumentParser(prog="aflux", description="Query AFLUX endpoints and run a local simulator.")
    parser.add_argument("-v", "--verbose", action="store_true", help="log HTTP traffic to stderr")
    sub = parser.add_subparsers(dest="command", required=True)

    q = sub.add_parser("query", help="run a search and print matching entries")
    q.add_argument("--root", default=None, help="search endpoint (default: $AFLUX_ROOT)")
    q.add_argument("--filter", dest="filter_text", default=None,
                   help='filter expression, e.g. \'Egap > 6 & (nspecies == 2 | natoms < 10)\'')
    q.add_argument("--select", action="append", default=[], metavar="K")
    q.add_argument("--exclude", action="append", default=[], metavar="K")
    q.add_argument("--orderby", default=None, metavar="K")
    q.add_argument("--desc", action="store_true", help="descending order")
    q.add_argument("--batch", type=int, default=100, help="page size (default 100)")
    q.add_argument("--limit", type=int, default=None, help="print at most N entries")
    q.add_argument("--format", choices=("table", "json", "csv"), default=None)

    k = sub.add_parser("keywords", help="list or describe the queryable keywords")
    k.add_argument("--describe", metavar="NAME", default=None)
    k.add_argument("--root", default=None, help="fetch the schema from this endpoint instead")

    f = sub.add_parser("fetch", help="show one entry, optionally exported as a structure")
    f.add_argument("--root", default=None)
    f.add_argument("--auid", required=True)
    f.add_argument("--property", action="append", default=[], metavar="K",
                   help="also fetch this property (repeatable)")
    f.add_argument("--export", choices=("xyz", "poscar"), default=None)

    s = sub.add_parser("serve", help="run the offline simulator")
    s.add_argument("--dataset", default=None, help="fixture JSON (default: bundled fixtures)")
    s.add_argument("--schema", default=None, help="schema JSON (default: bundled schema)")
    s.add_argument("--host", default="127.0.0.1")
    s.add_argument("--port", type=int, default=8080)
    return parser


def _rows_for(entry, columns):
    return [entry.raw.get(c, "") for c in columns]


def _print_table(rows, header, out):
    widths = [max(len(str(v)) for v in col) for col in zip(header, *rows)]
    for row in [header, *rows]:
        out.write("  ".join(str(v).ljust(w) for v, w in zip(row, widths)).rstrip() + "\n")


def cmd_query(args, out) -> int:
    q = search(args.root, args.batch)
    if args.filter_text:
        q = q.filter(parse_filter_dsl(args.filter_text))
    if args.select:
        q = q.select(*args.select)
    if args.exclude:
        q = q.exclude(*args.exclude)
    if args.orderby:
        q = q.orderby(args.orderby, args.desc)
    elif args.desc:
        first = q.plan().order_keyword
        q = q.orderby(first, True)
    if args.limit is not None and args.limit < 0:
        raise argparse.ArgumentTypeError("--limit must be non-negative")

    results = q.execute()
    count = len(results) if args.limit is None else min(args.limit, len(results))
    entries = [results.at(i) for i in range(count)]
    columns = [c for c in q.plan().visible_keywords() if c not in ("auid", "aurl", "compound")]
    fmt = args.format or ("table" if out.isatty() else "json")

    if fmt == "json":
        for rank, entry in enumerate(entries, 1):
            obj = {"rank": rank, "auid": entry.auid, "aurl": entry.aurl,
                   "compound": entry.raw.get("compound")}
            for c in columns:
                obj[c] = to_jsonable(entry.value(c)) if c in entry.raw else None
            out.write(json.dumps(obj) + "\n")
    elif fmt == "csv":
        writer = csv.writer(out, lineterminator="\n")
        writer.writerow(["rank", "auid", "compound", *columns])
        for rank, entry in enumerate(entries, 1):
            writer.writerow([rank, entry.auid, entry.raw.get("compound", ""), *_rows_for(entry, columns)])
    else:
        rows = [[rank, e.auid, e.raw.get("compound", ""), *_rows_for(e, columns)]
                for rank, e in enumerate(entries, 1)]
        _print_table(rows, ["rank", "auid", "compound", *columns], out)
        if count < len(results):
            out.write(f"({count} of {len(results)} matches shown)\n")
    return EXIT_OK


def cmd_keywords(args, out) -> int:
    if args.root:
        response = Transport().fetch(schema_url(args.root))
        if response.status != 200:
            raise ProtocolError(f"schema request returned HTTP {response.status}")
        registry = load_schema(response.body, source="fetched")
    else:
        registry = bundled_registry()
    if args.describe:
        out.write(render_keyword(registry.lookup(args.describe)))
    else:
        out.write(render_catalog(registry))
    return EXIT_OK


def cmd_fetch(args, out) -> int:
    q = search(args.root, 1).filter(compare("auid", Op.EQ, args.auid))
    results = q.execute()
    if len(results) == 0:
        raise ProtocolError(f"no entry with auid {args.auid!r}")
    entry = results.at(0)
    if args.export:
        out.write(entry.export(args.export))
        return EXIT_OK
    obj = {"auid": entry.auid, "aurl": entry.aurl}
    for name in args.property:
        obj[name] = to_jsonable(entry.value(name))
    for name, raw in entry.raw.items():
        obj.setdefault(name, raw)
    out.write(json.dumps(obj, indent=2) + "\n")
    return EXIT_OK


def cmd_serve(args, out) -> int:
    schema = schema_bytes = None
    if args.schema:
        with open(args.schema, "rb") as fh:
            schema_bytes = fh.read()
        schema = load_schema(schema_bytes)
    if args.dataset:
        with open(args.dataset, "rb") as fh:
            dataset = load_dataset(fh.read(), schema, schema_bytes)
    else:
        dataset = bundled_dataset()
    server = SimulatorServer(dataset, args.host, args.port)
    print(f"serving {len(dataset)} records at {server.root}", file=sys.stderr, flush=True)
    try:
        server.serve_forever()
    except KeyboardInterrupt:
        pass
    finally:
        server.server_close()
    return EXIT_OK


COMMANDS = {"query": cmd_query, "keywords": cmd_keywords, "fetch": cmd_fetch, "serve": cmd_serve}


def main(argv=None, out=None) -> int:
    out = out or sys.stdout
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    if args.verbose:
        logging.basicConfig(level=logging.DEBUG, stream=sys.stderr)
    try:
        return COMMANDS[args.command](args, out)
    except DslSyntaxError as exc:
        print(f"aflux: {exc.render()}", file=sys.stderr)
        return EXIT_USAGE
    except UnknownKeywordError as exc:
        print(f"aflux: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except _REMOTE_ERRORS as exc:
        print(f"aflux: {exc}", file=sys.stderr)
        return EXIT_REMOTE
    except (AfluxError, argparse.ArgumentTypeError, OSError) as exc:
        print(f"aflux: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
