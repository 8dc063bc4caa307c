"""Quantifier-free formulas over typed program variables.

Atoms are boolean variables and comparisons between linear integer terms.
Variables carry a prime level (0 or 1) so that formulas can describe
transition relations between a pre- and a post-state.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Optional, Union

Value = Union[bool, int]
GroundState = Mapping[str, Value]


class FormulaError(Exception):
    pass


class AlreadyPrimed(FormulaError):
    """Raised when priming a formula that already mentions primed variables."""


class UnboundVariable(FormulaError):
    """Raised when evaluation or substitution misses a required variable."""


@dataclass(frozen=True, order=True)
class Var:
    name: str
    primed: bool = False

    def __str__(self) -> str:
        return self.name + "'" if self.primed else self.name


@dataclass(frozen=True)
class Term:
    """Linear integer term: `const` plus a sum of coefficient * variable,
    with coefficients nonzero and variables sorted."""

    coeffs: tuple[tuple[Var, int], ...] = ()
    const: int = 0

    def __add__(self, other: "Term") -> "Term":
        return _mk_term(
            {v: c for v, c in self.coeffs},
            self.const + other.const,
            other.coeffs,
        )

    def __sub__(self, other: "Term") -> "Term":
        return self + other.scaled(-1)

    def __neg__(self) -> "Term":
        return self.scaled(-1)

    def scaled(self, k: int) -> "Term":
        if k == 0:
            return Term()
        return Term(tuple((v, c * k) for v, c in self.coeffs), self.const * k)

    def is_const(self) -> bool:
        return not self.coeffs

    def __str__(self) -> str:
        if not self.coeffs:
            return str(self.const)
        parts: list[str] = []
        for v, c in self.coeffs:
            if not parts:
                if c == 1:
                    parts.append(f"{v}")
                elif c == -1:
                    parts.append(f"-{v}")
                else:
                    parts.append(f"{c} * {v}")
            else:
                sign = "+" if c > 0 else "-"
                mag = abs(c)
                parts.append(f"{sign} {v}" if mag == 1 else f"{sign} {mag} * {v}")
        if self.const > 0:
            parts.append(f"+ {self.const}")
        elif self.const < 0:
            parts.append(f"- {-self.const}")
        return " ".join(parts)


def _mk_term(
    base: dict[Var, int], const: int, extra: tuple[tuple[Var, int], ...] = ()
) -> Term:
    for v, c in extra:
        base[v] = base.get(v, 0) + c
    coeffs = tuple(sorted(((v, c) for v, c in base.items() if c != 0)))
    return Term(coeffs, const)


def tvar(name: str, primed: bool = False) -> Term:
    return Term(((Var(name, primed), 1),))


def tconst(n: int) -> Term:
    return Term((), n)


class Formula:
    """Base class; all nodes are immutable dataclasses."""

    __slots__ = ()

    def __and__(self, other: "Formula") -> "Formula":
        return conj(self, other)

    def __or__(self, other: "Formula") -> "Formula":
        return disj(self, other)

    def __invert__(self) -> "Formula":
        return neg(self)

    def __str__(self) -> str:
        return render_formula(self)

    def __repr__(self) -> str:
        return render_formula(self)


@dataclass(frozen=True, repr=False)
class BoolLit(Formula):
    value: bool


@dataclass(frozen=True, repr=False)
class BoolRef(Formula):
    var: Var


@dataclass(frozen=True, repr=False)
class Cmp(Formula):
    op: str  # one of ==, !=, <, <=
    lhs: Term
    rhs: Term

    def __post_init__(self) -> None:
        if self.op not in ("==", "!=", "<", "<="):
            raise ValueError(f"bad comparison operator {self.op!r}")


@dataclass(frozen=True, repr=False)
class Not(Formula):
    arg: Formula


@dataclass(frozen=True, repr=False)
class And(Formula):
    args: tuple[Formula, ...]


@dataclass(frozen=True, repr=False)
class Or(Formula):
    args: tuple[Formula, ...]


@dataclass(frozen=True, repr=False)
class Implies(Formula):
    lhs: Formula
    rhs: Formula


TRUE = BoolLit(True)
FALSE = BoolLit(False)


def boolref(name: str, primed: bool = False) -> Formula:
    return BoolRef(Var(name, primed))


def cmp(op: str, lhs: Term, rhs: Term) -> Formula:
    """Comparison atom; constant-folds when both sides are constants."""
    if lhs.is_const() and rhs.is_const():
        a, b = lhs.const, rhs.const
        result = {"==": a == b, "!=": a != b, "<": a < b, "<=": a <= b}[op]
        return TRUE if result else FALSE
    return Cmp(op, lhs, rhs)


def conj(*parts: Formula) -> Formula:
    flat: list[Formula] = []
    for p in parts:
        if p is FALSE or (isinstance(p, BoolLit) and not p.value):
            return FALSE
        if isinstance(p, BoolLit):
            continue
        if isinstance(p, And):
            flat.extend(p.args)
        else:
            flat.append(p)
    if not flat:
        return TRUE
    if len(flat) == 1:
        return flat[0]
    return And(tuple(flat))


def disj(*parts: Formula) -> Formula:
    flat: list[Formula] = []
    for p in parts:
        if isinstance(p, BoolLit):
            if p.value:
                return TRUE
            continue
        if isinstance(p, Or):
            flat.extend(p.args)
        else:
            flat.append(p)
    if not flat:
        return FALSE
    if len(flat) == 1:
        return flat[0]
    return Or(tuple(flat))


def neg(f: Formula) -> Formula:
    if isinstance(f, BoolLit):
        return FALSE if f.value else TRUE
    if isinstance(f, Not):
        return f.arg
    return Not(f)


def implies(p: Formula, q: Formula) -> Formula:
    if isinstance(p, BoolLit):
        return q if p.value else TRUE
    if isinstance(q, BoolLit) and q.value:
        return TRUE
    return Implies(p, q)


def free_vars(f: Formula) -> frozenset[Var]:
    if isinstance(f, BoolLit):
        return frozenset()
    if isinstance(f, BoolRef):
        return frozenset((f.var,))
    if isinstance(f, Cmp):
        return frozenset(v for v, _ in f.lhs.coeffs) | frozenset(
            v for v, _ in f.rhs.coeffs
        )
    if isinstance(f, Not):
        return free_vars(f.arg)
    if isinstance(f, (And, Or)):
        out: frozenset[Var] = frozenset()
        for a in f.args:
            out |= free_vars(a)
        return out
    assert isinstance(f, Implies)
    return free_vars(f.lhs) | free_vars(f.rhs)


def prime(f: Formula) -> Formula:
    """Prime every free variable; the input must not contain primed ones."""
    if any(v.primed for v in free_vars(f)):
        raise AlreadyPrimed(f"formula already mentions primed variables: {f}")
    return substitute(
        f, {v: Var(v.name, True) for v in free_vars(f)}, partial=False
    )


Substitution = Mapping[Var, Union[Var, Term, Formula, int, bool]]


def _subst_term(t: Term, sub: Substitution, partial: bool) -> Term:
    acc = tconst(t.const)
    for v, c in t.coeffs:
        if v in sub:
            repl = sub[v]
            if isinstance(repl, bool):
                raise UnboundVariable(f"integer variable {v} bound to a boolean")
            if isinstance(repl, int):
                repl = tconst(repl)
            elif isinstance(repl, Var):
                repl = Term(((repl, 1),))
            elif not isinstance(repl, Term):
                raise UnboundVariable(f"integer variable {v} bound to a formula")
            acc = acc + repl.scaled(c)
        elif partial:
            acc = acc + Term(((v, c),))
        else:
            raise UnboundVariable(f"no binding for {v}")
    return acc


def substitute(f: Formula, sub: Substitution, partial: bool = True) -> Formula:
    """Capture-free substitution of variables by terms, formulas, or values.

    With `partial` (the default) unmapped variables are left in place.
    """
    if isinstance(f, BoolLit):
        return f
    if isinstance(f, BoolRef):
        if f.var in sub:
            repl = sub[f.var]
            if isinstance(repl, bool):
                return TRUE if repl else FALSE
            if isinstance(repl, Var):
                return BoolRef(repl)
            if isinstance(repl, Formula):
                return repl
            raise UnboundVariable(f"boolean variable {f.var} bound to {repl!r}")
        if partial:
            return f
        raise UnboundVariable(f"no binding for {f.var}")
    if isinstance(f, Cmp):
        return cmp(f.op, _subst_term(f.lhs, sub, partial), _subst_term(f.rhs, sub, partial))
    if isinstance(f, Not):
        return neg(substitute(f.arg, sub, partial))
    if isinstance(f, And):
        return conj(*(substitute(a, sub, partial) for a in f.args))
    if isinstance(f, Or):
        return disj(*(substitute(a, sub, partial) for a in f.args))
    assert isinstance(f, Implies)
    return implies(substitute(f.lhs, sub, partial), substitute(f.rhs, sub, partial))


def _lookup(v: Var, s: Optional[GroundState], sp: Optional[GroundState]) -> Value:
    env = sp if v.primed else s
    if env is None or v.name not in env:
        raise UnboundVariable(f"no value for {v}")
    return env[v.name]


def eval_term(t: Term, s: Optional[GroundState], sp: Optional[GroundState] = None) -> int:
    total = t.const
    for v, c in t.coeffs:
        val = _lookup(v, s, sp)
        if isinstance(val, bool):
            raise UnboundVariable(f"{v} holds a boolean, expected an integer")
        total += c * val
    return total


def evaluate(
    f: Formula, s: Optional[GroundState], sp: Optional[GroundState] = None
) -> bool:
    """Ground evaluation: unprimed variables read from `s`, primed from `sp`."""
    if isinstance(f, BoolLit):
        return f.value
    if isinstance(f, BoolRef):
        val = _lookup(f.var, s, sp)
        if not isinstance(val, bool):
            raise UnboundVariable(f"{f.var} holds an integer, expected a boolean")
        return val
    if isinstance(f, Cmp):
        a = eval_term(f.lhs, s, sp)
        b = eval_term(f.rhs, s, sp)
        if f.op == "==":
            return a == b
        if f.op == "!=":
            return a != b
        if f.op == "<":
            return a < b
        return a <= b
    if isinstance(f, Not):
        return not evaluate(f.arg, s, sp)
    if isinstance(f, And):
        return all(evaluate(a, s, sp) for a in f.args)
    if isinstance(f, Or):
        return any(evaluate(a, s, sp) for a in f.args)
    assert isinstance(f, Implies)
    return (not evaluate(f.lhs, s, sp)) or evaluate(f.rhs, s, sp)


_PREC = {"implies": 0, "or": 1, "and": 2, "not": 3}


def render_formula(f: Formula, prec: int = 0) -> str:
    if isinstance(f, BoolLit):
        return "true" if f.value else "false"
    if isinstance(f, BoolRef):
        return str(f.var)
    if isinstance(f, Cmp):
        return f"{f.lhs} {f.op} {f.rhs}"
    if isinstance(f, Implies):
        s = f"{render_formula(f.lhs, 1)} ==> {render_formula(f.rhs, 0)}"
        return f"({s})" if prec > 0 else s
    if isinstance(f, Or):
        s = " || ".join(render_formula(a, 2) for a in f.args)
        return f"({s})" if prec > 1 else s
    if isinstance(f, And):
        s = " && ".join(render_formula(a, 3) for a in f.args)
        return f"({s})" if prec > 2 else s
    assert isinstance(f, Not)
    arg = f.arg
    if isinstance(arg, (BoolLit, BoolRef, Not)):
        return f"!{render_formula(arg, 3)}"
    return f"!({render_formula(arg, 0)})"
