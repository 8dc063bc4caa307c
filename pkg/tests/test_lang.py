import pytest

from retrace import regex as rx
from retrace.corpus import CORPUS, MUTANTS, path
from retrace.formula import TRUE, BoolRef, Var, cmp, neg, tconst, tvar
from retrace.lang import (
    Assign,
    Call,
    DuplicateName,
    Havoc,
    If,
    ParseError,
    Seq,
    TypeMismatch,
    UnboundName,
    UndeclaredEvent,
    UndeclaredVariable,
    While,
    load,
    modified_in,
    parse,
    pretty,
    resolve,
)
from retrace.tracespec import TraceOption


def parse_one(body: str, header: str = "events a, b;\n") -> object:
    return parse(header + body)


# -- shapes -------------------------------------------------------------------


def test_even_odd_shape():
    p = parse(open(path("even_odd")).read())
    proc = p.procedures["even_odd"]
    assert proc.locals == {"b": "bool", "nd": "bool"}
    body = proc.body
    assert isinstance(body, Seq)
    loop = body.stmts[-1]
    assert isinstance(loop, While)
    assert len(loop.trace_inv.options) == 2
    ee_star = rx.star(rx.concat(rx.symbol("even"), rx.symbol("odd")))
    assert loop.trace_inv.options[0] == TraceOption(ee_star, neg(BoolRef(Var("b"))))
    assert loop.trace_inv.options[1] == TraceOption(
        rx.concat(ee_star, rx.symbol("even")), BoolRef(Var("b"))
    )
    assert not loop.local_trace


def test_plus_and_guard_annotation():
    p = parse(
        "events letter, at;\n"
        "int state;\n"
        "proc q() _(trace letter+ at if state == 2) ;\n"
    )
    opt = p.procedures["q"].trace.options[0]
    letter = rx.symbol("letter")
    assert opt.regex is rx.concat(letter, rx.star(letter), rx.symbol("at"))
    assert opt.guard == cmp("==", tvar("state"), tconst(2))


def test_no_trace_clause_is_empty_spec():
    p = parse("events a;\nproc q() { }\n")
    assert p.procedures["q"].trace.options == ()


def test_empty_word_and_grouping():
    p = parse("events a, b;\nproc q() _(trace ()) _(trace (a | b)* a) ;\n")
    opts = p.procedures["q"].trace.options
    assert opts[0].regex is rx.EPSILON
    ab = rx.choice(rx.symbol("a"), rx.symbol("b"))
    assert opts[1].regex is rx.concat(rx.star(ab), rx.symbol("a"))


def test_nondet_becomes_havoc():
    p = parse_one("proc q() { bool x = nondet(); int y; y = nondet(); }")
    stmts = p.procedures["q"].body.stmts
    assert stmts[0] == Havoc("x")
    assert stmts[1] == Havoc("y")


def test_abort_is_bodiless_call_with_false_postcondition():
    p = load("events a;\nproc q() { abort(); }\n")
    assert p.procedures["q"].body.stmts[0] == Call("abort")
    ab = p.procedures["abort"]
    assert ab.body is None
    assert ab.ensures.value is False


def test_local_trace_flag():
    p = parse_one("proc q() { while (true) _(trace local (a | b)) { } }")
    loop = p.procedures["q"].body.stmts[0]
    assert loop.local_trace
    assert loop.trace_inv.options[0].guard == TRUE


def test_else_if_chain():
    p = parse_one(
        "int x;\n"
        "proc q() { if (x == 0) { x = 1; } else if (x == 1) { x = 2; } else { } }"
    )
    top = p.procedures["q"].body.stmts[0]
    assert isinstance(top, If)
    nested = top.orelse.stmts[0]
    assert isinstance(nested, If)
    assert nested.then.stmts[0] == Assign("x", tconst(2))


def test_consts_fold_into_formulas():
    p = parse(
        "events a;\nconst K = 3;\nint x;\nproc q() { if (x == K) { x = K - 1; } }"
    )
    top = p.procedures["q"].body.stmts[0]
    assert top.test == cmp("==", tvar("x"), tconst(3))
    assert top.then.stmts[0] == Assign("x", tconst(2))


def test_comparison_normalization():
    p = parse_one("int x;\nproc q() { if (x > 3) { } if (x >= 3) { } }")
    s = p.procedures["q"].body.stmts
    assert s[0].test == cmp("<", tconst(3), tvar("x"))
    assert s[1].test == cmp("<=", tconst(3), tvar("x"))


def test_primed_in_ensures_only():
    p = parse_one("int x;\nproc q() _(modifies x) _(ensures x' == x + 1) ;")
    ens = p.procedures["q"].ensures
    assert ens == cmp("==", tvar("x", True), tvar("x") + tconst(1))
    with pytest.raises(ParseError):
        parse_one("int x;\nproc q() _(requires x' == 0) ;")


# -- errors -------------------------------------------------------------------


def test_undeclared_event():
    with pytest.raises(UndeclaredEvent):
        parse("events a;\nproc q() { _(emit zz) }")
    with pytest.raises(UndeclaredEvent):
        parse("events a;\nproc q() _(trace zz) ;")


def test_undeclared_variable():
    with pytest.raises(UndeclaredVariable):
        parse("events a;\nproc q() { x = 1; }")


def test_duplicate_names():
    with pytest.raises(DuplicateName):
        parse("events a, a;\n")
    with pytest.raises(DuplicateName):
        parse("events a;\nint a;\n")
    with pytest.raises(DuplicateName):
        parse("events e;\nproc q() { int x; bool x; }")


def test_call_to_undeclared_procedure_is_unbound():
    with pytest.raises(UnboundName):
        load("events a;\nproc q() { check(); }")


def test_int_loop_test_is_type_error():
    with pytest.raises(TypeMismatch):
        load("events a;\nint x;\nproc q() { while (x) { } }")


def test_bool_int_mixing_is_type_error():
    with pytest.raises(TypeMismatch):
        parse("events a;\nbool f;\nint x;\nproc q() { x = f; }")
    with pytest.raises(TypeMismatch):
        parse("events a;\nbool f;\nproc q() { if (f < 3) { } }")


def test_syntax_error_has_position():
    with pytest.raises(ParseError) as exc:
        parse("events a;\nproc q() { emit }")
    assert exc.value.line == 2


def test_chained_comparison_rejected():
    with pytest.raises(ParseError):
        parse_one("int x;\nproc q() { if (0 < x < 5) { } }")


def test_nonlinear_rejected():
    with pytest.raises(ParseError):
        parse_one("int x;\nint y;\nproc q() { if (x * y == 0) { } }")


def test_local_trace_rejected_in_contract():
    with pytest.raises(ParseError):
        parse_one("proc q() _(trace local a) ;")


def test_mixed_local_and_full_history_rejected():
    with pytest.raises(ParseError):
        parse_one(
            "proc q() { while (true) _(trace local a) _(trace a* if true) { } }"
        )


# -- resolve ------------------------------------------------------------------


def test_resolve_casino_constants():
    p = load(open(path("casino")).read())
    loop = p.procedures["main"].body.stmts[-1]
    guards = [o.guard for o in loop.trace_inv.options]
    assert guards[0] == cmp("==", tvar("state"), tconst(0))
    assert guards[1] == cmp("==", tvar("state"), tconst(1))
    assert guards[2] == cmp("==", tvar("state"), tconst(2))


def test_resolve_entry_and_domain():
    p = load(open(path("matcher")).read())
    assert p.entry == "lex"  # first bodied procedure; no main here
    lo, hi = p.int_domain
    assert lo <= -5 and hi >= 126


def test_resolve_mod_sets_transitive():
    p = load(
        "events a;\nint x;\nint y;\n"
        "proc inner() _(modifies x) ;\n"
        "proc mid() { inner(); y = 1; }\n"
        "proc outer() { mid(); }\n"
    )
    assert p.procedures["inner"].mod_set == {"x"}
    assert p.procedures["mid"].mod_set == {"x", "y"}
    assert p.procedures["outer"].mod_set == {"x", "y"}


def test_resolve_recursive_mod_sets():
    p = load(open(path("casino_rec")).read())
    for name in ("game_idle", "game_available", "game_placed", "main"):
        assert p.procedures[name].mod_set == {"pot"}


def test_modified_in_includes_calls():
    p = load(open(path("matcher")).read())
    loop = p.procedures["lex"].body.stmts[-1]
    assert modified_in(loop.body, p) == {"c", "state"}


def test_resolve_checks_hand_built_ast():
    p = parse("events a;\nproc q() { }")
    p.procedures["q"].trace = __import__("retrace.tracespec", fromlist=["plain"]).plain(
        rx.symbol("zz")
    )
    with pytest.raises(UndeclaredEvent):
        resolve(p)


# -- pretty printing ----------------------------------------------------------


@pytest.mark.parametrize("name", sorted(CORPUS) + sorted(MUTANTS))
def test_pretty_roundtrip(name):
    src = open(path(name)).read()
    p1 = parse(src)
    assert parse(pretty(p1)) == p1


def test_pretty_is_stable():
    src = open(path("casino")).read()
    p1 = parse(src)
    once = pretty(p1)
    assert pretty(parse(once)) == once
