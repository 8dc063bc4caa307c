"""Regular expressions over a finite event alphabet.

Terms are kept in a canonical form (flattened concatenation, choice as a
sorted duplicate-free set, collapsed stars) and interned, so structurally
equal expressions are the same object.  This makes the memoization keys of
the inclusion check stable under reordering and duplication of choices,
which is what guarantees its termination.
"""

from __future__ import annotations

import sys
from dataclasses import dataclass
from typing import Optional

Word = tuple[str, ...]


class Regex:
    """Base class for regex nodes.

    Instances are interned by the module-level constructors; equality and
    hashing are therefore identity-based and O(1).  Do not instantiate the
    node classes directly.
    """

    __slots__ = ("_str", "_nullable", "_first")

    def __init__(self) -> None:
        self._str: Optional[str] = None
        self._nullable: Optional[bool] = None
        self._first: Optional[frozenset[str]] = None

    def __repr__(self) -> str:
        return render(self)


class Empty(Regex):
    __slots__ = ()


class Epsilon(Regex):
    __slots__ = ()


class Symbol(Regex):
    __slots__ = ("event",)

    def __init__(self, event: str) -> None:
        super().__init__()
        self.event = event


class Concat(Regex):
    # factors: len >= 2, no Empty/Epsilon/Concat children
    __slots__ = ("factors",)

    def __init__(self, factors: tuple[Regex, ...]) -> None:
        super().__init__()
        self.factors = factors


class Choice(Regex):
    # options: len >= 2, sorted by rendering, unique, no Empty/Choice children
    __slots__ = ("options",)

    def __init__(self, options: tuple[Regex, ...]) -> None:
        super().__init__()
        self.options = options


class Star(Regex):
    # inner is not Empty/Epsilon/Star
    __slots__ = ("inner",)

    def __init__(self, inner: Regex) -> None:
        super().__init__()
        self.inner = inner


EMPTY: Regex = Empty()
EPSILON: Regex = Epsilon()

_interned: dict[object, Regex] = {}


def symbol(event: str) -> Regex:
    """Single-event regex."""
    if not event:
        raise ValueError("event name must be nonempty")
    key = ("sym", event)
    r = _interned.get(key)
    if r is None:
        r = Symbol(event)
        _interned[key] = r
    return r


def concat(*parts: Regex) -> Regex:
    """Sequential composition; drops neutral factors, annihilates on the
    empty language."""
    flat: list[Regex] = []
    for p in parts:
        if p is EMPTY:
            return EMPTY
        if p is EPSILON:
            continue
        if isinstance(p, Concat):
            flat.extend(p.factors)
        else:
            flat.append(p)
    if not flat:
        return EPSILON
    if len(flat) == 1:
        return flat[0]
    key = ("cat", tuple(id(f) for f in flat))
    r = _interned.get(key)
    if r is None:
        r = Concat(tuple(flat))
        _interned[key] = r
    return r


def choice(*parts: Regex) -> Regex:
    """Union; the options form a flattened, sorted, duplicate-free set."""
    flat: list[Regex] = []
    for p in parts:
        if p is EMPTY:
            continue
        if isinstance(p, Choice):
            flat.extend(p.options)
        else:
            flat.append(p)
    seen: set[int] = set()
    uniq: list[Regex] = []
    for p in flat:
        if id(p) not in seen:
            seen.add(id(p))
            uniq.append(p)
    if not uniq:
        return EMPTY
    if len(uniq) == 1:
        return uniq[0]
    uniq.sort(key=render)
    key = ("alt", tuple(id(o) for o in uniq))
    r = _interned.get(key)
    if r is None:
        r = Choice(tuple(uniq))
        _interned[key] = r
    return r


def star(r: Regex) -> Regex:
    """Repetition; star of the empty word or empty language is the empty
    word, nested stars collapse."""
    if r is EMPTY or r is EPSILON:
        return EPSILON
    if isinstance(r, Star):
        return r
    key = ("star", id(r))
    s = _interned.get(key)
    if s is None:
        s = Star(r)
        _interned[key] = s
    return s


def plus(r: Regex) -> Regex:
    """One-or-more repetition, surface sugar for r followed by r*."""
    return concat(r, star(r))


def render(r: Regex) -> str:
    """Deterministic concrete syntax; used for display and for the stable
    ordering of choice options."""
    if r._str is None:
        r._str = _render(r, 0)
    return r._str


def _render(r: Regex, prec: int) -> str:
    # precedence: choice 0, concat 1, star 2
    if r is EMPTY:
        return "∅"
    if r is EPSILON:
        return "()"
    if isinstance(r, Symbol):
        return r.event
    if isinstance(r, Choice):
        s = " | ".join(_render(o, 1) for o in r.options)
        return f"({s})" if prec > 0 else s
    if isinstance(r, Concat):
        s = " ".join(_render(f, 2) for f in r.factors)
        return f"({s})" if prec > 1 else s
    assert isinstance(r, Star)
    inner = _render(r.inner, 3)
    return f"{inner}*"


def nullable(r: Regex) -> bool:
    """Whether the language contains the empty word."""
    if r._nullable is None:
        if r is EMPTY:
            r._nullable = False
        elif r is EPSILON:
            r._nullable = True
        elif isinstance(r, Symbol):
            r._nullable = False
        elif isinstance(r, Concat):
            r._nullable = all(nullable(f) for f in r.factors)
        elif isinstance(r, Choice):
            r._nullable = any(nullable(o) for o in r.options)
        else:
            r._nullable = True  # Star
    return r._nullable


def is_empty(r: Regex) -> bool:
    """Whether the language is empty; canonical form reduces this to a
    single identity check."""
    return r is EMPTY


def first(r: Regex) -> frozenset[str]:
    """The exact set of events that begin some word of the language."""
    if r._first is None:
        if r is EMPTY or r is EPSILON:
            r._first = frozenset()
        elif isinstance(r, Symbol):
            r._first = frozenset((r.event,))
        elif isinstance(r, Choice):
            r._first = frozenset().union(*(first(o) for o in r.options))
        elif isinstance(r, Star):
            r._first = first(r.inner)
        else:
            assert isinstance(r, Concat)
            out = set(first(r.factors[0]))
            for i, f in enumerate(r.factors):
                if i > 0:
                    out |= first(f)
                if not nullable(f):
                    break
            r._first = frozenset(out)
    return r._first


def derive(event: str, r: Regex) -> Regex:
    """Brzozowski derivative: the language of suffixes after a leading
    occurrence of `event`."""
    if r is EMPTY or r is EPSILON:
        return EMPTY
    if isinstance(r, Symbol):
        return EPSILON if r.event == event else EMPTY
    if isinstance(r, Choice):
        return choice(*(derive(event, o) for o in r.options))
    if isinstance(r, Star):
        return concat(derive(event, r.inner), r)
    assert isinstance(r, Concat)
    head = r.factors[0]
    tail = concat(*r.factors[1:])
    d = concat(derive(event, head), tail)
    if nullable(head):
        d = choice(d, derive(event, tail))
    return d


def member(word: Word, r: Regex) -> bool:
    """Word membership via iterated derivatives."""
    for a in word:
        r = derive(a, r)
        if r is EMPTY:
            return False
    return nullable(r)


def alphabet(r: Regex) -> frozenset[str]:
    """All events mentioned in the expression."""
    if isinstance(r, Symbol):
        return frozenset((r.event,))
    if isinstance(r, Concat):
        return frozenset().union(*(alphabet(f) for f in r.factors))
    if isinstance(r, Choice):
        return frozenset().union(*(alphabet(o) for o in r.options))
    if isinstance(r, Star):
        return alphabet(r.inner)
    return frozenset()


def shortest_word(r: Regex) -> Optional[Word]:
    """A shortest word of the language, or None when the language is empty."""
    if r is EMPTY:
        return None
    if r is EPSILON or isinstance(r, Star):
        return ()
    if isinstance(r, Symbol):
        return (r.event,)
    if isinstance(r, Concat):
        out: Word = ()
        for f in r.factors:
            w = shortest_word(f)
            assert w is not None  # canonical concat has no empty factor
            out += w
        return out
    assert isinstance(r, Choice)
    best: Optional[Word] = None
    for o in r.options:
        w = shortest_word(o)
        if w is not None and (best is None or (len(w), w) < (len(best), best)):
            best = w
    return best


@dataclass(frozen=True)
class InclusionResult:
    """Outcome of a language-inclusion check; `witness` is a word of the
    left language missing from the right one when the check fails."""

    holds: bool
    witness: Optional[Word] = None

    def __bool__(self) -> bool:
        return self.holds


def included(u: Regex, v: Regex) -> InclusionResult:
    """Decide L(u) ⊆ L(v) by simultaneous derivatives.

    The memo set of visited pairs acts as a simulation relation between the
    two expressions; canonical interning makes its keys stable, which
    bounds the recursion.  On failure the derivative path is unwound into a
    shortest-found counterexample word.
    """
    limit = sys.getrecursionlimit()
    if limit < 10000:
        sys.setrecursionlimit(10000)
    gamma: set[tuple[Regex, Regex]] = set()

    def go(u: Regex, v: Regex) -> Optional[Word]:
        if (u, v) in gamma:
            return None
        if v is EMPTY:
            return None if u is EMPTY else shortest_word(u)
        if nullable(u) and not nullable(v):
            return ()
        gamma.add((u, v))
        for a in sorted(first(u)):
            w = go(derive(a, u), derive(a, v))
            if w is not None:
                return (a,) + w
        return None

    try:
        w = go(u, v)
    finally:
        if sys.getrecursionlimit() != limit:
            sys.setrecursionlimit(limit)
    return InclusionResult(w is None, w)


def equivalent(u: Regex, v: Regex) -> bool:
    """Language equality, i.e. inclusion both ways."""
    return included(u, v).holds and included(v, u).holds
