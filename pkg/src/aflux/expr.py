"""Boolean filter expressions over keywords.

Leaves are :class:`Compare` nodes; ``~``, ``&`` and ``|`` build
:class:`Not`, :class:`And` and :class:`Or` trees. Comparison semantics::

    numbers   GT: v > x     LT: v < x     EQ: v == x
    strings   GT: v starts with x   LT: v ends with x
              CONTAINS: x in v      EQ: v == x

List-valued properties match when any element does. A leaf over a
property the entry does not have is false.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Callable, Iterator, Union

from .errors import InvalidComparisonError
from .schema import Keyword, Kind, KeywordRegistry


class Op(str, enum.Enum):
    GT = "GT"
    LT = "LT"
    EQ = "EQ"
    CONTAINS = "CONTAINS"


@dataclass(frozen=True)
class Literal:
    value: float | str

    def __post_init__(self):
        v = self.value
        if isinstance(v, bool) or not isinstance(v, (int, float, str)):
            raise InvalidComparisonError(f"unsupported literal {v!r}")
        if isinstance(v, (int, float)):
            v = float(v)
            if not math.isfinite(v):
                raise InvalidComparisonError(f"non-finite literal {v!r}")
            # -0.0 and 0.0 are the same operand
            object.__setattr__(self, "value", v + 0.0)

    @property
    def is_number(self) -> bool:
        return isinstance(self.value, float)

    @property
    def is_text(self) -> bool:
        return isinstance(self.value, str)


class _Combinable:
    __slots__ = ()

    def __and__(self, other):
        return combine("AND", self, other)

    def __or__(self, other):
        return combine("OR", self, other)

    def __invert__(self):
        return negate(self)


@dataclass(frozen=True)
class Compare(_Combinable):
    keyword: str
    op: Op
    operand: Literal

    def __str__(self):
        sym = {Op.GT: ">", Op.LT: "<", Op.EQ: "==", Op.CONTAINS: "%"}[self.op]
        v = self.operand.value
        return f"{self.keyword} {sym} {v!r}" if isinstance(v, str) else f"{self.keyword} {sym} {v:g}"


@dataclass(frozen=True)
class Not(_Combinable):
    inner: FilterExpr

    def __str__(self):
        return f"~({self.inner})"


@dataclass(frozen=True)
class And(_Combinable):
    left: FilterExpr
    right: FilterExpr

    def __str__(self):
        return f"({self.left}) & ({self.right})"


@dataclass(frozen=True)
class Or(_Combinable):
    left: FilterExpr
    right: FilterExpr

    def __str__(self):
        return f"({self.left}) | ({self.right})"


FilterExpr = Union[Compare, Not, And, Or]
_NODES = (Compare, Not, And, Or)


def compare(keyword, op: Op | str, operand) -> Compare:
    name = getattr(keyword, "name", keyword)
    op = Op(op)
    lit = operand if isinstance(operand, Literal) else Literal(operand)
    if op is Op.CONTAINS and lit.is_number:
        raise InvalidComparisonError(f"{name} % {lit.value:g}: substring search needs a string operand")
    if lit.is_text and "'" in lit.value:
        raise InvalidComparisonError(f"string operand {lit.value!r} cannot contain a single quote")
    return Compare(name, op, lit)


def negate(e: FilterExpr) -> Not:
    _check(e)
    return Not(e)


def combine(op: str, a: FilterExpr, b: FilterExpr) -> FilterExpr:
    _check(a)
    _check(b)
    op = op.upper()
    if op == "AND":
        return And(a, b)
    if op == "OR":
        return Or(a, b)
    raise ValueError(f"unknown boolean operator {op!r}")


def _check(e) -> None:
    if not isinstance(e, _NODES):
        raise TypeError(f"expected a filter expression, got {type(e).__name__}; "
                        "wrap comparisons in parentheses before combining with & or |")


def normalize(e: FilterExpr) -> FilterExpr:
    """Push negations down to the leaves (De Morgan), dropping double negations."""
    if isinstance(e, Compare):
        return e
    if isinstance(e, And):
        return And(normalize(e.left), normalize(e.right))
    if isinstance(e, Or):
        return Or(normalize(e.left), normalize(e.right))
    inner = e.inner
    if isinstance(inner, Compare):
        return e
    if isinstance(inner, Not):
        return normalize(inner.inner)
    if isinstance(inner, And):
        return Or(normalize(Not(inner.left)), normalize(Not(inner.right)))
    return And(normalize(Not(inner.left)), normalize(Not(inner.right)))


def is_normal(e: FilterExpr) -> bool:
    if isinstance(e, Compare):
        return True
    if isinstance(e, Not):
        return isinstance(e.inner, Compare)
    return is_normal(e.left) and is_normal(e.right)


def leaves(e: FilterExpr) -> Iterator[Compare]:
    if isinstance(e, Compare):
        yield e
    elif isinstance(e, Not):
        yield from leaves(e.inner)
    else:
        yield from leaves(e.left)
        yield from leaves(e.right)


def keywords(e: FilterExpr) -> list[str]:
    """Keyword names referenced by ``e`` in order of first appearance."""
    return list(dict.fromkeys(leaf.keyword for leaf in leaves(e)))


def conjuncts(e: FilterExpr) -> list[FilterExpr]:
    if isinstance(e, And):
        return conjuncts(e.left) + conjuncts(e.right)
    return [e]


@dataclass(frozen=True)
class Issue:
    leaf: Compare
    reason: str

    def __str__(self):
        return f"{self.leaf}: {self.reason}"


def check_leaf(leaf: Compare, kw: Keyword) -> str | None:
    """Reason why ``leaf`` is not a valid comparison on ``kw``, or None."""
    kind = kw.kind
    if not kind.comparable:
        return f"keyword {kw.name} of kind {kind.value} cannot be compared"
    if kind.is_numeric:
        if not leaf.operand.is_number:
            return f"type mismatch: {kw.name} is numeric but operand is text"
        if leaf.op is Op.CONTAINS:
            return f"type mismatch: substring search on numeric keyword {kw.name}"
    elif not leaf.operand.is_text:
        return f"type mismatch: {kw.name} is a string keyword but operand is a number"
    return None


def validate(e: FilterExpr, registry: KeywordRegistry) -> list[Issue]:
    issues = []
    for leaf in leaves(e):
        if leaf.keyword not in registry:
            issues.append(Issue(leaf, f"unknown keyword {leaf.keyword!r}"))
            continue
        reason = check_leaf(leaf, registry[leaf.keyword])
        if reason:
            issues.append(Issue(leaf, reason))
    return issues


def _scalar_match(op: Op, value, operand) -> bool:
    if isinstance(value, str):
        if not isinstance(operand, str):
            return False
        if op is Op.GT:
            return value.startswith(operand)
        if op is Op.LT:
            return value.endswith(operand)
        if op is Op.CONTAINS:
            return operand in value
        return value == operand
    if isinstance(operand, str) or op is Op.CONTAINS:
        return False
    if op is Op.GT:
        return value > operand
    if op is Op.LT:
        return value < operand
    return value == operand


def matches(e: FilterExpr, get: Callable[[str], object]) -> bool:
    """Evaluate ``e`` against an entry.

    ``get(keyword)`` returns the decoded property (a scalar, a tuple for
    list kinds) or None when the entry lacks it.
    """
    if isinstance(e, Compare):
        value = get(e.keyword)
        if value is None:
            return False
        if isinstance(value, tuple):
            return any(_scalar_match(e.op, v, e.operand.value) for v in value)
        return _scalar_match(e.op, value, e.operand.value)
    if isinstance(e, Not):
        return not matches(e.inner, get)
    if isinstance(e, And):
        return matches(e.left, get) and matches(e.right, get)
    return matches(e.left, get) or matches(e.right, get)


class KeywordRef:
    """Operator-overloading handle for one keyword, e.g. ``K.Egap > 6``."""

    __slots__ = ("keyword",)

    def __init__(self, keyword: Keyword):
        self.keyword = keyword

    @property
    def name(self) -> str:
        return self.keyword.name

    @property
    def kind(self) -> Kind:
        return self.keyword.kind

    def __gt__(self, other):
        return compare(self, Op.GT, other)

    def __lt__(self, other):
        return compare(self, Op.LT, other)

    def __eq__(self, other):
        return compare(self, Op.EQ, other)

    def __mod__(self, other):
        return compare(self, Op.CONTAINS, other)

    def __hash__(self):
        return hash(self.keyword.name)

    def __repr__(self):
        return f"K.{self.keyword.name}"


class KeywordNamespace:
    """Attribute access to every keyword of a registry."""

    def __init__(self, registry: KeywordRegistry):
        self._registry = registry
        self._refs = {name: KeywordRef(kw) for name, kw in registry.items()}

    def __getattr__(self, name: str) -> KeywordRef:
        if name.startswith("_"):
            raise AttributeError(name)
        try:
            return self._refs[name]
        except KeyError:
            self._registry.lookup(name)
            raise

    def __dir__(self):
        return sorted(self._refs)

    def __iter__(self):
        return iter(self._refs.values())

    def __len__(self):
        return len(self._refs)
