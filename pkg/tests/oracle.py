"""Brute-force reference evaluator over the raw fixture file.

Deliberately shares nothing with the package beyond the AST node classes:
raw strings are split and converted here, and each operator is spelled
out directly.
"""

import json
import random

from aflux.expr import And, Compare, Not, Or, compare

NUMERIC = {"scalar-number", "number-list"}
LISTS = {"number-list", "string-list"}


def load_records(raw_bytes, schema_json):
    kinds = {d["name"]: d["kind"] for d in json.loads(schema_json)}
    out = []
    for rec in json.loads(raw_bytes):
        values = {}
        raw = dict(rec["properties"], auid=rec["auid"], aurl=rec["aurl"], compound=rec["compound"])
        for key, text in raw.items():
            kind = kinds[key]
            if kind not in NUMERIC and kind not in {"scalar-string", "string-list"}:
                continue
            items = text.split(",") if kind in LISTS else [text]
            values[key] = [float(x) for x in items] if kind in NUMERIC else items
        out.append({"auid": rec["auid"], "values": values, "raw": raw})
    return out


def leaf_holds(leaf, record):
    items = record["values"].get(leaf.keyword)
    if items is None:
        return False
    x = leaf.operand.value
    op = leaf.op.value
    for v in items:
        if isinstance(v, str):
            if not isinstance(x, str):
                continue
            hit = {"GT": v[:len(x)] == x,
                   "LT": len(v) >= len(x) and v[len(v) - len(x):] == x,
                   "CONTAINS": any(v[i:i + len(x)] == x for i in range(len(v) - len(x) + 1)),
                   "EQ": v == x}[op]
        else:
            if isinstance(x, str) or op == "CONTAINS":
                continue
            hit = {"GT": v > x, "LT": v < x, "EQ": v == x}[op]
        if hit:
            return True
    return False


def holds(expr, record):
    if isinstance(expr, Compare):
        return leaf_holds(expr, record)
    if isinstance(expr, Not):
        return not holds(expr.inner, record)
    if isinstance(expr, And):
        return holds(expr.left, record) and holds(expr.right, record)
    if isinstance(expr, Or):
        return holds(expr.left, record) or holds(expr.right, record)
    raise TypeError(expr)


def match_set(expr, records):
    return {r["auid"] for r in records if holds(expr, r)}


NUMERIC_KEYS = ["Egap", "agl_thermal_conductivity_300K", "natoms", "nspecies", "density",
                "spacegroup_relax", "composition", "geometry", "spinD"]
STRING_KEYS = ["author", "compound", "prototype", "lattice_system_relax", "Egap_type",
               "species", "species_pp", "files"]


class ExprGenerator:
    """Random filter trees with operands drawn near real fixture values."""

    def __init__(self, records, seed):
        self.rng = random.Random(seed)
        self.pool = {}
        for key in NUMERIC_KEYS + STRING_KEYS:
            vals = sorted({v for r in records for v in r["values"].get(key, [])}, key=str)
            self.pool[key] = vals

    def leaf(self):
        r = self.rng
        if r.random() < 0.5:
            key = r.choice(NUMERIC_KEYS)
            vals = self.pool[key]
            x = r.choice(vals) if vals and r.random() < 0.7 else round(r.uniform(-1, 200), 2)
            return compare(key, r.choice(["GT", "LT", "EQ"]), x)
        key = r.choice(STRING_KEYS)
        vals = self.pool[key]
        s = r.choice(vals) if vals else "x"
        if r.random() < 0.6 and len(s) > 1:
            i = r.randrange(len(s))
            j = r.randrange(i + 1, len(s) + 1)
            s = s[i:j]
        return compare(key, r.choice(["GT", "LT", "EQ", "CONTAINS"]), s)

    def tree(self, depth=3):
        r = self.rng
        if depth == 0 or r.random() < 0.3:
            return self.leaf()
        c = r.random()
        if c < 0.2:
            return Not(self.tree(depth - 1))
        if c < 0.6:
            return And(self.tree(depth - 1), self.tree(depth - 1))
        return Or(self.tree(depth - 1), self.tree(depth - 1))
