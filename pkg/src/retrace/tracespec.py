"""Conditional trace specifications: guarded choices of plain regexes.

A specification evaluates per state to the union of the options whose
guards hold.  Completion appends an empty-word default so that unannotated
behavior means "no events"; guarded inclusion obligations reduce a
state-dependent inclusion to plain regex inclusions by eager case analysis
over the guards.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

from . import regex as rx
from .formula import (
    TRUE,
    Formula,
    GroundState,
    Substitution,
    conj,
    disj,
    evaluate,
    neg,
    prime,
    substitute,
)
from .solver import Solver


@dataclass(frozen=True)
class TraceOption:
    regex: rx.Regex
    guard: Formula

    def __str__(self) -> str:
        return f"{rx.render(self.regex)} if {self.guard}"


@dataclass(frozen=True)
class TraceSpec:
    options: tuple[TraceOption, ...] = ()

    def __str__(self) -> str:
        if not self.options:
            return "<no trace>"
        return " | ".join(str(o) for o in self.options)

    def __iter__(self):
        return iter(self.options)

    def __len__(self) -> int:
        return len(self.options)


def spec_of(*options: tuple[rx.Regex, Formula]) -> TraceSpec:
    return TraceSpec(tuple(TraceOption(r, g) for r, g in options))


def plain(r: rx.Regex) -> TraceSpec:
    """A plain regex read as the specification `r if true`."""
    return TraceSpec((TraceOption(r, TRUE),))


def eval_at(
    spec: TraceSpec, s: Optional[GroundState], sp: Optional[GroundState] = None
) -> rx.Regex:
    """Evaluate at a ground state: the union of options with a true guard,
    the empty language when none holds."""
    return rx.choice(*(o.regex for o in spec.options if evaluate(o.guard, s, sp)))


def complete(spec: TraceSpec) -> TraceSpec:
    """Append the empty-word option guarded by the negation of all other
    guards; the empty specification becomes `() if true`."""
    rest = neg(disj(*(o.guard for o in spec.options)))
    return TraceSpec(spec.options + (TraceOption(rx.EPSILON, rest),))


def frame_prefix(w: rx.Regex, spec: TraceSpec) -> TraceSpec:
    """Prepend a state-independent regex to every option."""
    return TraceSpec(
        tuple(TraceOption(rx.concat(w, o.regex), o.guard) for o in spec.options)
    )


def subst_spec(spec: TraceSpec, sub: Substitution) -> TraceSpec:
    """Apply a substitution to every guard (regexes are state-independent)."""
    return TraceSpec(
        tuple(TraceOption(o.regex, substitute(o.guard, sub)) for o in spec.options)
    )


def prime_spec(spec: TraceSpec) -> TraceSpec:
    """Prime all guard variables, giving the post-state reading."""
    return TraceSpec(
        tuple(TraceOption(o.regex, prime(o.guard)) for o in spec.options)
    )


@dataclass(frozen=True)
class GuardedInclusion:
    """The obligation `context ==> (left . emitted ⊑ right)`."""

    context: Formula
    left: TraceSpec
    emitted: rx.Regex
    right: TraceSpec


@dataclass(frozen=True)
class InclusionCase:
    """One discharged (or failed) case of a guarded inclusion."""

    context: Formula
    lhs: rx.Regex
    rhs: rx.Regex
    holds: bool
    witness: Optional[rx.Word] = None
    note: Optional[str] = None

    def describe(self) -> str:
        verdict = "holds" if self.holds else "FAILS"
        s = f"{rx.render(self.lhs)} ⊑ {rx.render(self.rhs)} [{verdict}]"
        if self.witness is not None:
            s += f" witness ⟨{', '.join(self.witness)}⟩"
        if self.note:
            s += f" ({self.note})"
        return s


def inclusion_obligations(
    context: Formula,
    left: TraceSpec,
    emitted: rx.Regex,
    right: TraceSpec,
    solver: Solver,
) -> list[InclusionCase]:
    """Case-split a guarded inclusion into plain regex inclusion checks.

    For every satisfiable combination of a left option and a right option
    guard, the right-hand side is the union of all right options whose
    guards are entailed by that case; together the returned verdicts
    establish `context ==> (left . emitted ⊑ right)`.  `right` must already
    be completed, so its guards cover every state.  An undecidable case
    guard is conservatively reported as a failure.
    """
    cases: list[InclusionCase] = []
    for lopt in left.options:
        for ropt in right.options:
            ctx = conj(context, lopt.guard, ropt.guard)
            sat = solver.satisfiable(ctx)
            if sat.status == "unsat":
                continue
            if sat.status == "unknown":
                cases.append(
                    InclusionCase(
                        ctx,
                        rx.concat(lopt.regex, emitted),
                        ropt.regex,
                        False,
                        note="cannot decide guard: " + (sat.diagnostic or "unknown"),
                    )
                )
                continue
            entailed = [
                o.regex
                for o in right.options
                if solver.entails(ctx, o.guard).status == "valid"
            ]
            lhs = rx.concat(lopt.regex, emitted)
            rhs = rx.choice(*entailed)
            inc = rx.included(lhs, rhs)
            cases.append(InclusionCase(ctx, lhs, rhs, inc.holds, inc.witness))
    return cases
