"""Forward symbolic execution of the proof rules.

Each procedure with a body is verified in isolation against its own
contract.  Execution states carry a symbolic store, a path constraint, and
a plain trace prefix; conditional trace specifications are split into
plain cases eagerly, and unsatisfiable branches are pruned.  Loops are
dispatched modularly through their invariant and trace annotations, calls
through the callee contract.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Union

from . import regex as rx
from .formula import (
    FALSE,
    TRUE,
    BoolRef,
    Formula,
    Term,
    Var,
    conj,
    neg,
    render_formula,
    substitute,
)
from .lang import (
    Abort,
    Assign,
    Call,
    Command,
    Emit,
    Havoc,
    If,
    Procedure,
    Program,
    Seq,
    SpecStmt,
    Span,
    While,
    modified_in,
)
from .solver import BuiltinSolver, Solver
from .tracespec import (
    InclusionCase,
    TraceOption,
    TraceSpec,
    complete,
    inclusion_obligations,
    subst_spec,
)

GUARD_CHECK = "guard-check"
ENTAILMENT = "entailment"
INVARIANT_PRESERVATION = "invariant-preservation"
TRACE_INCLUSION = "trace-inclusion"

VACUOUS_SPEC = "VacuousSpec"

SymValue = Union[Term, Formula]
Store = dict[str, SymValue]


@dataclass
class Obligation:
    kind: str
    description: str
    holds: bool
    span: Optional[Span] = None
    context: str = ""
    lhs: str = ""
    rhs: str = ""
    witness: Optional[tuple[str, ...]] = None
    model: Optional[dict[str, Union[bool, int]]] = None
    note: Optional[str] = None
    # regex payloads of trace inclusions, for programmatic consumers
    lhs_regex: Optional[rx.Regex] = None
    rhs_regex: Optional[rx.Regex] = None

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "description": self.description,
            "holds": self.holds,
            "span": {"line": self.span.line, "col": self.span.col} if self.span else None,
            "context": self.context,
            "lhs": self.lhs,
            "rhs": self.rhs,
            "witness": list(self.witness) if self.witness is not None else None,
            "model": {k: v for k, v in sorted(self.model.items())} if self.model else None,
            "note": self.note,
        }

    def describe(self) -> str:
        verdict = "ok" if self.holds else "FAIL"
        where = f"{self.span.line}:{self.span.col}" if self.span else "-"
        s = f"[{self.kind}] {where} {self.description}: {self.lhs} ⊑ {self.rhs}" \
            if self.kind == TRACE_INCLUSION else \
            f"[{self.kind}] {where} {self.description}: {self.rhs}"
        s += f" ... {verdict}"
        if self.witness is not None:
            s += f"  witness ⟨{', '.join(self.witness)}⟩"
        if self.note:
            s += f"  ({self.note})"
        return s


@dataclass
class ProcedureReport:
    name: str
    obligations: list[Obligation] = field(default_factory=list)
    warnings: list[str] = field(default_factory=list)

    @property
    def verified(self) -> bool:
        return all(o.holds for o in self.obligations)

    @property
    def status(self) -> str:
        return "verified" if self.verified else "failed"

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "status": self.status,
            "obligations": [o.to_dict() for o in self.obligations],
            "warnings": list(self.warnings),
        }


@dataclass
class VerdictReport:
    source: str
    procedures: list[ProcedureReport] = field(default_factory=list)

    @property
    def verified(self) -> bool:
        return all(p.verified for p in self.procedures)

    def to_dict(self) -> dict:
        return {
            "source": self.source,
            "verified": self.verified,
            "procedures": [p.to_dict() for p in self.procedures],
        }


@dataclass
class SymState:
    store: Store
    path: Formula
    prefix: rx.Regex

    def fork(self) -> "SymState":
        return SymState(dict(self.store), self.path, self.prefix)


class Verifier:
    def __init__(self, program: Program, solver: Optional[Solver] = None) -> None:
        self.p = program
        self.solver = solver if solver is not None else BuiltinSolver()
        self._fresh_count = 0

    # -- plumbing -----------------------------------------------------------

    def fresh(self, name: str, ty: str) -> SymValue:
        self._fresh_count += 1
        v = Var(f"{name}#{self._fresh_count}")
        return BoolRef(v) if ty == "bool" else Term(((v, 1),))

    def fresh_store(self, proc: Procedure) -> Store:
        store: Store = {}
        for name, gv in self.p.variables.items():
            store[name] = self.fresh(name, gv.type)
        for name, ty in proc.locals.items():
            store[name] = self.fresh(name, ty)
        return store

    def havoc(self, store: Store, names: list[str], proc: Procedure) -> Store:
        out = dict(store)
        for name in names:
            ty = self.p.var_type(name, proc)
            if ty is not None:
                out[name] = self.fresh(name, ty)
        return out

    @staticmethod
    def ground(f: Formula, store: Store) -> Formula:
        return substitute(f, {Var(name): val for name, val in store.items()})

    @staticmethod
    def ground2(f: Formula, pre: Store, post: Store) -> Formula:
        sub: dict[Var, SymValue] = {Var(name): val for name, val in pre.items()}
        sub.update({Var(name, True): val for name, val in post.items()})
        return substitute(f, sub)

    def ground_spec(self, spec: TraceSpec, store: Store) -> TraceSpec:
        return subst_spec(spec, {Var(name): val for name, val in store.items()})

    def feasible(self, f: Formula) -> bool:
        # only a definite unsat prunes; unknown keeps the branch
        return self.solver.satisfiable(f).status != "unsat"

    # -- obligations --------------------------------------------------------

    def _entailment(
        self,
        obs: list[Obligation],
        kind: str,
        desc: str,
        path: Formula,
        target: Formula,
        span: Optional[Span],
    ) -> None:
        if target == TRUE:
            return
        r = self.solver.entails(path, target)
        model = None
        note = None
        if r.status == "invalid" and r.model:
            model = {str(k): v for k, v in r.model.items()}  # type: ignore[misc]
        if r.status == "unknown":
            note = "solver answered unknown: " + (r.diagnostic or "")
        obs.append(
            Obligation(
                kind,
                desc,
                r.status == "valid",
                span=span,
                context=render_formula(path),
                rhs=render_formula(target),
                model=model,
                note=note,
            )
        )

    def _inclusions(
        self,
        obs: list[Obligation],
        desc: str,
        cases: list[InclusionCase],
        span: Optional[Span],
    ) -> None:
        for case in cases:
            obs.append(
                Obligation(
                    TRACE_INCLUSION,
                    desc,
                    case.holds,
                    span=span,
                    context=render_formula(case.context),
                    lhs=rx.render(case.lhs),
                    rhs=rx.render(case.rhs),
                    witness=case.witness,
                    note=case.note,
                    lhs_regex=case.lhs,
                    rhs_regex=case.rhs,
                )
            )

    # -- execution ----------------------------------------------------------

    def exec(
        self, c: Command, state: SymState, proc: Procedure,
        obs: list[Obligation], warnings: list[str],
    ) -> list[SymState]:
        if isinstance(c, Seq):
            states = [state]
            for s in c.stmts:
                nxt: list[SymState] = []
                for st in states:
                    nxt.extend(self.exec(s, st, proc, obs, warnings))
                states = nxt
            return states
        if isinstance(c, Emit):
            state.prefix = rx.concat(state.prefix, rx.symbol(c.event))
            return [state]
        if isinstance(c, Assign):
            if isinstance(c.value, Term):
                sub = {Var(name): val for name, val in state.store.items()}
                grounded: SymValue = _subst_into_term(c.value, sub)
            else:
                grounded = self.ground(c.value, state.store)
            state.store[c.var] = grounded
            return [state]
        if isinstance(c, Havoc):
            ty = self.p.var_type(c.var, proc) or "int"
            state.store[c.var] = self.fresh(c.var, ty)
            return [state]
        if isinstance(c, If):
            t = self.ground(c.test, state.store)
            out: list[SymState] = []
            for cond, branch in ((t, c.then), (neg(t), c.orelse)):
                path2 = conj(state.path, cond)
                if not self.feasible(path2):
                    continue
                st = state.fork()
                st.path = path2
                out.extend(self.exec(branch, st, proc, obs, warnings))
            return out
        if isinstance(c, While):
            return self.exec_while(c, state, proc, obs, warnings)
        if isinstance(c, Call):
            callee = self.p.procedures[c.proc]
            mods = tuple(sorted(callee.mod_set if callee.mod_set is not None else frozenset(callee.modifies)))
            stmt = SpecStmt(mods, callee.requires, callee.ensures, callee.trace, span=c.span)
            return self.exec_spec_stmt(stmt, state, proc, obs, f"call {c.proc}")
        if isinstance(c, SpecStmt):
            return self.exec_spec_stmt(c, state, proc, obs, "spec statement")
        if isinstance(c, Abort):
            self._entailment(obs, GUARD_CHECK, "abort unreachable", state.path, FALSE, c.span)
            return []
        raise ValueError(f"cannot execute {c!r}")

    def exec_spec_stmt(
        self, c: SpecStmt, state: SymState, proc: Procedure,
        obs: list[Obligation], what: str,
    ) -> list[SymState]:
        g = self.ground(c.guard, state.store)
        if g != TRUE:
            self._entailment(obs, GUARD_CHECK, f"{what}: guard", state.path, g, c.span)
        pre_store = state.store
        post_store = self.havoc(pre_store, list(c.mods), proc)
        rel = self.ground2(c.rel, pre_store, post_store)
        path2 = conj(state.path, rel)
        out: list[SymState] = []
        for opt in complete(c.trace).options:
            phi = self.ground(opt.guard, pre_store)
            path3 = conj(path2, phi)
            if not self.feasible(path3):
                continue
            out.append(
                SymState(dict(post_store), path3, rx.concat(state.prefix, opt.regex))
            )
        return out

    def exec_while(
        self, w: While, state: SymState, proc: Procedure,
        obs: list[Obligation], warnings: list[str],
    ) -> list[SymState]:
        inv = w.invariant
        self._entailment(
            obs, ENTAILMENT, "loop invariant established",
            state.path, self.ground(inv, state.store), w.span,
        )
        mods = sorted(modified_in(w.body, self.p))
        if w.local_trace:
            return self._while_local(w, state, proc, obs, warnings, mods)
        return self._while_full(w, state, proc, obs, warnings, mods)

    def _while_full(
        self, w: While, state: SymState, proc: Procedure,
        obs: list[Obligation], warnings: list[str], mods: list[str],
    ) -> list[SymState]:
        spec = complete(w.trace_inv)
        # establishment: the accumulated prefix is covered by the invariant
        # evaluated at the loop head state
        self._inclusions(
            obs,
            "loop trace invariant established",
            inclusion_obligations(
                state.path,
                TraceSpec((TraceOption(state.prefix, TRUE),)),
                rx.EPSILON,
                self.ground_spec(spec, state.store),
                self.solver,
            ),
            w.span,
        )
        # preservation: from an arbitrary state satisfying test and invariant,
        # with the prefix replaced by each satisfiable invariant case
        hstore = self.havoc(state.store, mods, proc)
        path_body = conj(
            self.ground(w.invariant, hstore), self.ground(w.test, hstore)
        )
        if self.feasible(path_body):
            head_spec = self.ground_spec(spec, hstore)
            for opt in head_spec.options:
                case_path = conj(path_body, opt.guard)
                if not self.feasible(case_path):
                    continue
                start = SymState(dict(hstore), case_path, opt.regex)
                for fin in self.exec(w.body, start, proc, obs, warnings):
                    self._entailment(
                        obs, INVARIANT_PRESERVATION, "loop invariant preserved",
                        fin.path, self.ground(w.invariant, fin.store), w.span,
                    )
                    self._inclusions(
                        obs,
                        "loop trace invariant preserved",
                        inclusion_obligations(
                            fin.path,
                            TraceSpec((TraceOption(fin.prefix, TRUE),)),
                            rx.EPSILON,
                            self.ground_spec(spec, fin.store),
                            self.solver,
                        ),
                        w.span,
                    )
        # continuation: exit states assume the invariant and the negated test;
        # the prefix becomes the invariant case that matches the exit state
        cstore = self.havoc(state.store, mods, proc)
        cpath = conj(
            state.path,
            self.ground(w.invariant, cstore),
            neg(self.ground(w.test, cstore)),
        )
        if not self.feasible(cpath):
            return []
        out: list[SymState] = []
        exit_spec = self.ground_spec(spec, cstore)
        user_cases = 0
        for i, opt in enumerate(exit_spec.options):
            path_exit = conj(cpath, opt.guard)
            if not self.feasible(path_exit):
                continue
            if i < len(w.trace_inv.options):
                user_cases += 1
            out.append(SymState(dict(cstore), path_exit, opt.regex))
        if w.trace_inv.options and user_cases == 0:
            warnings.append(
                f"{VACUOUS_SPEC}: no loop trace case matches the exit state"
                + (f" at {w.span.line}:{w.span.col}" if w.span else "")
            )
        return out

    def _while_local(
        self, w: While, state: SymState, proc: Procedure,
        obs: list[Obligation], warnings: list[str], mods: list[str],
    ) -> list[SymState]:
        body_lang = w.trace_inv.options[0].regex if w.trace_inv.options else rx.EPSILON
        hstore = self.havoc(state.store, mods, proc)
        path_body = conj(
            self.ground(w.invariant, hstore), self.ground(w.test, hstore)
        )
        if self.feasible(path_body):
            start = SymState(dict(hstore), path_body, rx.EPSILON)
            for fin in self.exec(w.body, start, proc, obs, warnings):
                self._entailment(
                    obs, INVARIANT_PRESERVATION, "loop invariant preserved",
                    fin.path, self.ground(w.invariant, fin.store), w.span,
                )
                self._inclusions(
                    obs,
                    "loop body trace covered",
                    inclusion_obligations(
                        fin.path,
                        TraceSpec((TraceOption(fin.prefix, TRUE),)),
                        rx.EPSILON,
                        complete(TraceSpec((TraceOption(body_lang, TRUE),))),
                        self.solver,
                    ),
                    w.span,
                )
        cstore = self.havoc(state.store, mods, proc)
        cpath = conj(
            state.path,
            self.ground(w.invariant, cstore),
            neg(self.ground(w.test, cstore)),
        )
        if not self.feasible(cpath):
            return []
        # the loop contributes any number of body observations, framed onto
        # the prefix accumulated so far
        return [SymState(dict(cstore), cpath, rx.concat(state.prefix, rx.star(body_lang)))]

    # -- procedure and program level ----------------------------------------

    def finalize_path(
        self, state: SymState, proc: Procedure, entry: Store,
        obs: list[Obligation],
    ) -> None:
        post = self.ground2(proc.ensures, entry, state.store)
        self._entailment(obs, ENTAILMENT, "postcondition", state.path, post, proc.span)
        contract = self.ground_spec(complete(proc.trace), state.store)
        self._inclusions(
            obs,
            "contract trace",
            inclusion_obligations(
                state.path,
                TraceSpec((TraceOption(state.prefix, TRUE),)),
                rx.EPSILON,
                contract,
                self.solver,
            ),
            proc.span,
        )

    def verify_procedure(self, name: str) -> ProcedureReport:
        proc = self.p.procedures[name]
        if proc.body is None:
            raise ValueError(f"procedure {name!r} has no body")
        report = ProcedureReport(name=name)
        entry = self.fresh_store(proc)
        path0 = self.ground(proc.requires, entry)
        if not self.feasible(path0):
            report.warnings.append("precondition is unsatisfiable; contract holds vacuously")
            return report
        start = SymState(dict(entry), path0, rx.EPSILON)
        finals = self.exec(proc.body, start, proc, report.obligations, report.warnings)
        for st in finals:
            self.finalize_path(st, proc, entry, report.obligations)
        return report

    def verify_program(self) -> VerdictReport:
        report = VerdictReport(source=self.p.source)
        for name, proc in self.p.procedures.items():
            if proc.body is not None:
                report.procedures.append(self.verify_procedure(name))
        return report


def _subst_into_term(t: Term, sub: dict[Var, SymValue]) -> Term:
    acc = Term((), t.const)
    for v, c in t.coeffs:
        val = sub.get(v)
        if val is None:
            acc = acc + Term(((v, c),))
        elif isinstance(val, Term):
            acc = acc + val.scaled(c)
        else:
            raise ValueError(f"integer variable {v} bound to a formula")
    return acc


def verify_program(p: Program, solver: Optional[Solver] = None) -> VerdictReport:
    """Verify every procedure with a body against its contract."""
    return Verifier(p, solver).verify_program()
