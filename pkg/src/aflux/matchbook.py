"""Translation between query plans and summons strings.

A summons is the query string of a search request::

    agl_thermal_conductivity_300K,Egap(6*),$paging(-1,20)

Top-level items are joined by ``,`` (AND) and ``:`` (OR, binding looser
than ``,``); each item is a keyword, optionally ``$``-prefixed (hidden
from the response) and optionally followed by a parenthesised pattern.
The first keyword orders the results and the sign of the page number
gives the direction. Patterns use the same ``,``/``:`` operators plus
``!`` for negation and ``*`` globs::

    6*   > 6        *6   < 6        6   == 6
    's'* starts-with    *'s' ends-with    *'s'* contains    's' equals
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Iterator, Union
from urllib.parse import quote, unquote

from .errors import (MissingDirectiveError, NotEncodableError, PagingRangeError,
                     PatternTypeError, SummonsSyntaxError, UnknownDirectiveError, UsageError)
from .expr import (And, Compare, FilterExpr, Literal, Not, Op, Or, conjuncts, keywords,
                   leaves, normalize)
from .schema import Keyword, Kind, KeywordRegistry
from .serialization import format_number, parse_number

# Characters transmitted verbatim in the URL query string.
URL_SAFE = "-_.~(),:*$!'"

DIRECTIVES = frozenset({"paging", "format", "schema"})

_NAME_RE = re.compile(r"[A-Za-z_][A-Za-z0-9_]*")
_TOKEN_RE = re.compile(r"[A-Za-z0-9_.+-]+")
_BAREWORD_RE = re.compile(r"[A-Za-z0-9_.-]+")
_SIGNED_RE = re.compile(r"-?\d+")
_POS_RE = re.compile(r"\d+")


@dataclass(frozen=True)
class MatchbookEntry:
    keyword: str
    filter: FilterExpr | None = None
    hidden: bool = False

    def __post_init__(self):
        if self.filter is not None:
            stray = [l.keyword for l in leaves(self.filter) if l.keyword != self.keyword]
            if stray:
                raise UsageError(f"filter on {self.keyword} references {', '.join(stray)}")


@dataclass(frozen=True)
class EntryGroup:
    """Boolean combination of matchbook entries spanning several keywords."""

    op: str
    items: tuple[Item, ...]

    def __post_init__(self):
        if self.op not in ("and", "or"):
            raise UsageError(f"group operator must be 'and' or 'or', got {self.op!r}")
        object.__setattr__(self, "items", tuple(self.items))
        if len(self.items) < 2:
            raise UsageError("a group needs at least two items")


Item = Union[MatchbookEntry, EntryGroup]


def _entries(item: Item) -> Iterator[MatchbookEntry]:
    if isinstance(item, MatchbookEntry):
        yield item
    else:
        for sub in item.items:
            yield from _entries(sub)


@dataclass(frozen=True)
class QueryPlan:
    """Normalized search request; top-level matchbook items are AND-ed."""

    matchbook: tuple[Item, ...]
    page: int = 1
    page_size: int = 100

    def __post_init__(self):
        object.__setattr__(self, "matchbook", tuple(self.matchbook))
        if not self.matchbook:
            raise UsageError("a plan needs at least one matchbook entry")
        if self.page == 0:
            raise PagingRangeError("page number must be non-zero")
        if self.page_size < 1:
            raise PagingRangeError("page size must be positive")
        top = [i.keyword for i in self.matchbook if isinstance(i, MatchbookEntry)]
        if len(top) != len(set(top)):
            raise UsageError(f"duplicate top-level matchbook keywords in {top}")

    def entries(self) -> Iterator[MatchbookEntry]:
        for item in self.matchbook:
            yield from _entries(item)

    @property
    def order_keyword(self) -> str:
        return next(self.entries()).keyword

    @property
    def descending(self) -> bool:
        return self.page < 0

    @property
    def page_number(self) -> int:
        return abs(self.page)

    def keywords(self) -> list[str]:
        return list(dict.fromkeys(e.keyword for e in self.entries()))

    def visible_keywords(self) -> list[str]:
        return list(dict.fromkeys(e.keyword for e in self.entries() if not e.hidden))

    def with_page(self, page: int) -> QueryPlan:
        """Same request for another (1-based, unsigned) page number."""
        return QueryPlan(self.matchbook, -page if self.descending else page, self.page_size)


def _dedup(names) -> list[str]:
    return list(dict.fromkeys(names))


def _to_item(e: FilterExpr, hidden: frozenset) -> Item:
    kws = keywords(e)
    if len(kws) == 1:
        return MatchbookEntry(kws[0], e, kws[0] in hidden)
    if isinstance(e, (Not, Compare)):
        raise NotEncodableError(f"negation over several keywords cannot be encoded: {e}")
    kind = type(e)

    def flat(x):
        if type(x) is kind and len(keywords(x)) > 1:
            return flat(x.left) + flat(x.right)
        return [x]

    return EntryGroup("and" if kind is And else "or", tuple(_to_item(c, hidden) for c in flat(e)))


def plan_from_query(selects=(), excludes=(), filter: FilterExpr | None = None,
                    order: tuple[str, bool] | None = None, page: int = 1,
                    page_size: int = 100) -> QueryPlan:
    """Build the normalized plan for one page of a query.

    Conjuncts touching a single keyword are merged into that keyword's
    entry; conjuncts spanning several keywords become groups. The ordering
    keyword goes first, then selects, filtered keywords and exclusions.
    """
    if page < 1:
        raise UsageError(f"page must be >= 1, got {page}")
    if page_size < 1:
        raise UsageError(f"page_size must be >= 1, got {page_size}")
    selects = _dedup(selects)
    excludes = _dedup(excludes)
    hidden = frozenset(excludes)

    per_keyword: dict[str, FilterExpr] = {}
    groups: list[Item] = []
    filtered: list[str] = []
    if filter is not None:
        f = normalize(filter)
        filtered = keywords(f)
        for c in conjuncts(f):
            kws = keywords(c)
            if len(kws) == 1:
                k = kws[0]
                per_keyword[k] = And(per_keyword[k], c) if k in per_keyword else c
            else:
                groups.append(_to_item(c, hidden))

    if order is not None:
        order_key, descending = order[0], bool(order[1])
    elif selects:
        order_key, descending = selects[0], False
    elif filtered:
        order_key, descending = filtered[0], False
    else:
        raise UsageError("a query needs at least one select, filter or ordering keyword")

    names = _dedup([order_key, *selects, *per_keyword, *excludes])
    entries = [MatchbookEntry(k, per_keyword.get(k), k in hidden) for k in names]
    return QueryPlan(tuple(entries) + tuple(groups), -page if descending else page, page_size)


# -- encoding -----------------------------------------------------------------

def _encode_pattern(leaf: Compare) -> str:
    v = leaf.operand.value
    if leaf.operand.is_number:
        if leaf.op is Op.CONTAINS:
            raise NotEncodableError(f"substring search on a number: {leaf}")
        body = format_number(v)
    else:
        if "'" in v:
            raise NotEncodableError(f"string operand {v!r} contains a single quote")
        body = f"'{v}'"
    return {Op.GT: f"{body}*", Op.LT: f"*{body}",
            Op.CONTAINS: f"*{body}*", Op.EQ: body}[leaf.op]


def encode_filter(e: FilterExpr) -> str:
    """Inner pattern for a single-keyword expression (no keyword prefix)."""
    if isinstance(e, Compare):
        return _encode_pattern(e)
    if isinstance(e, Not):
        if isinstance(e.inner, Compare):
            return "!" + _encode_pattern(e.inner)
        return "!(" + encode_filter(e.inner) + ")"
    left, right = encode_filter(e.left), encode_filter(e.right)
    if isinstance(e, And):
        # left-nested chains read naturally; anything else is grouped
        if isinstance(e.left, Or):
            left = f"({left})"
        if isinstance(e.right, (And, Or)):
            right = f"({right})"
        return f"{left},{right}"
    if isinstance(e.left, And):
        left = f"({left})"
    if isinstance(e.right, (And, Or)):
        right = f"({right})"
    return f"{left}:{right}"


def _encode_item(item: Item) -> str:
    if isinstance(item, MatchbookEntry):
        text = ("$" if item.hidden else "") + item.keyword
        if item.filter is not None:
            text += "(" + encode_filter(item.filter) + ")"
        return text
    sep = "," if item.op == "and" else ":"
    return sep.join(_encode_item(i) if isinstance(i, MatchbookEntry) else f"({_encode_item(i)})"
                    for i in item.items)


def encode_summons(plan: QueryPlan) -> str:
    parts = [_encode_item(i) if isinstance(i, MatchbookEntry) else f"({_encode_item(i)})"
             for i in plan.matchbook]
    parts.append(f"$paging({plan.page},{plan.page_size})")
    return ",".join(parts)


def quote_summons(summons: str) -> str:
    return quote(summons, safe=URL_SAFE)


def unquote_summons(query: str) -> str:
    return unquote(query)


# -- parsing ------------------------------------------------------------------

class _Parser:
    def __init__(self, text: str, registry: KeywordRegistry | None = None):
        self.text = text
        self.pos = 0
        self.registry = registry

    # helpers
    def error(self, message: str, expected=(), pos: int | None = None):
        pos = self.pos if pos is None else pos
        offset = len(self.text[:pos].encode("utf-8"))
        return SummonsSyntaxError(message, offset, expected)

    def peek(self) -> str:
        return self.text[self.pos] if self.pos < len(self.text) else ""

    def eat(self, ch: str) -> bool:
        if self.text.startswith(ch, self.pos):
            self.pos += len(ch)
            return True
        return False

    def expect(self, ch: str, expected=None):
        if not self.eat(ch):
            found = self.peek()
            what = f"unexpected {found!r}" if found else "unexpected end of input"
            raise self.error(what, expected or (ch,))

    def match(self, regex):
        m = regex.match(self.text, self.pos)
        if m is None:
            return None
        self.pos = m.end()
        return m.group()

    # top level
    def at_directive(self, pos: int) -> bool:
        if not self.text.startswith("$", pos):
            return False
        m = _NAME_RE.match(self.text, pos + 1)
        return m is not None and m.group() in DIRECTIVES

    def summons(self) -> QueryPlan:
        if self.at_directive(self.pos):
            raise self.error("expected a keyword before directives", ("NAME",))
        ands = self.orgroup(top=True)
        items = ands[0] if len(ands) == 1 else [EntryGroup("or", [_and(a) for a in ands])]
        top = [i.keyword for i in items if isinstance(i, MatchbookEntry)]
        duplicates = sorted({k for k in top if top.count(k) > 1})
        if duplicates:
            raise self.error(f"duplicate matchbook keyword(s) {', '.join(duplicates)}")
        if self.pos >= len(self.text):
            raise MissingDirectiveError("summons has no $paging directive")
        self.expect(",", (",", ":", "$paging"))
        start = self.pos
        self.expect("$")
        name = self.match(_NAME_RE)
        if name != "paging":
            if name in DIRECTIVES:
                raise UnknownDirectiveError(f"unsupported directive ${name}")
            raise self.error("expected $paging directive", ("$paging",), pos=start)
        self.expect("(")
        page_text = self.match(_SIGNED_RE)
        if page_text is None:
            raise self.error("expected page number", ("INT",))
        self.expect(",")
        size_text = self.match(_POS_RE)
        if size_text is None:
            raise self.error("expected page size", ("POS_INT",))
        self.expect(")")
        if self.pos != len(self.text):
            raise self.error(f"unexpected {self.peek()!r} after $paging", ("end of input",))
        page, size = int(page_text), int(size_text)
        if page == 0:
            raise PagingRangeError("$paging page must be non-zero")
        if size == 0:
            raise PagingRangeError("$paging size must be positive")
        return QueryPlan(tuple(items), page, size)

    def orgroup(self, top: bool) -> list[list[Item]]:
        ands = [self.andgroup(top)]
        while self.eat(":"):
            ands.append(self.andgroup(top))
        return ands

    def andgroup(self, top: bool) -> list[Item]:
        items = [self.item()]
        while self.peek() == ",":
            if top and self.at_directive(self.pos + 1):
                break
            self.pos += 1
            items.append(self.item())
        return items

    def item(self) -> Item:
        if self.eat("("):
            ands = self.orgroup(top=False)
            self.expect(")", (",", ":", ")"))
            if len(ands) == 1:
                return _and(ands[0])
            return EntryGroup("or", [_and(a) for a in ands])
        return self.entry()

    def entry(self) -> MatchbookEntry:
        start = self.pos
        hidden = self.eat("$")
        name = self.match(_NAME_RE)
        if name is None:
            raise self.error("expected a keyword", ("NAME", "(") if not hidden else ("NAME",))
        if hidden and name in DIRECTIVES:
            if name == "paging":
                raise self.error("$paging must be the last item", pos=start)
            raise UnknownDirectiveError(f"unsupported directive ${name}")
        kind = None
        if self.registry is not None:
            if name not in self.registry:
                raise PatternTypeError(f"unknown keyword {name!r}")
            kind = self.registry[name].kind
        filt = None
        if self.eat("("):
            filt = self.inner(name, kind)
            self.expect(")", (",", ":", ")"))
        return MatchbookEntry(name, filt, hidden)

    # inner filter patterns
    def inner(self, keyword: str, kind: Kind | None) -> FilterExpr:
        node = self.iand(keyword, kind)
        while self.eat(":"):
            node = Or(node, self.iand(keyword, kind))
        return node

    def iand(self, keyword: str, kind: Kind | None) -> FilterExpr:
        node = self.iterm(keyword, kind)
        while self.eat(","):
            node = And(node, self.iterm(keyword, kind))
        return node

    def iterm(self, keyword: str, kind: Kind | None) -> FilterExpr:
        negated = self.eat("!")
        if self.eat("("):
            node = self.inner(keyword, kind)
            self.expect(")", (",", ":", ")"))
        else:
            node = self.pattern(keyword, kind)
        return Not(node) if negated else node

    def pattern(self, keyword: str, kind: Kind | None) -> Compare:
        start = self.pos
        lead = self.eat("*")
        quoted = False
        if self.eat("'"):
            end = self.text.find("'", self.pos)
            if end < 0:
                self.pos = len(self.text)
                raise self.error("unterminated string", ("'",))
            token = self.text[self.pos:end]
            self.pos = end + 1
            quoted = True
        else:
            token = self.match(_TOKEN_RE)
            if token is None:
                raise self.error("expected a pattern", ("NUM", "STR", "(", "!") if not lead else ("NUM", "STR"))
        trail = self.eat("*")

        def type_error(msg):
            return PatternTypeError(f"{msg} at byte {len(self.text[:start].encode('utf-8'))}")

        if kind is not None and not kind.comparable:
            raise type_error(f"keyword {keyword} of kind {kind.value} cannot be filtered")
        if quoted:
            if kind is not None and kind.is_numeric:
                raise type_error(f"string pattern on numeric keyword {keyword}")
            value = token
        else:
            number = parse_number(token)
            if kind is not None and kind.is_numeric:
                if number is None:
                    raise type_error(f"{token!r} is not a number for numeric keyword {keyword}")
                value = number
            elif kind is not None or number is None:
                if not _BAREWORD_RE.fullmatch(token):
                    raise self.error(f"invalid bare word {token!r}", pos=start)
                value = token
            else:
                value = number

        if lead and trail:
            if not isinstance(value, str):
                raise type_error(f"substring pattern on number for {keyword}")
            op = Op.CONTAINS
        elif lead:
            op = Op.LT
        elif trail:
            op = Op.GT
        else:
            op = Op.EQ
        return Compare(keyword, op, Literal(value))


def _and(items: list[Item]) -> Item:
    return items[0] if len(items) == 1 else EntryGroup("and", items)


def parse_summons(summons: str, registry: KeywordRegistry | None = None) -> QueryPlan:
    """Parse a (percent-decoded) summons string.

    Without a registry, unquoted numeric tokens are read as numbers and
    other bare words as strings; with one, the keyword kind decides and
    kind mismatches raise :class:`PatternTypeError`.
    """
    return _Parser(summons, registry).summons()


def parse_filter(keyword: Keyword | str, pattern: str) -> FilterExpr:
    if isinstance(keyword, Keyword):
        name, kind = keyword.name, keyword.kind
    else:
        name, kind = keyword, None
    p = _Parser(pattern)
    node = p.inner(name, kind)
    if p.pos != len(pattern):
        raise p.error(f"unexpected {p.peek()!r}", (",", ":", "end of input"))
    return node

