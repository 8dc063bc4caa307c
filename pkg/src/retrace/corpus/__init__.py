"""Bundled example programs and their registered mutants."""

from __future__ import annotations

import importlib.resources
from pathlib import Path

from ..lang import Program, load_file

# program name -> file
CORPUS = {
    "even_odd": "even_odd.rt",
    "matcher": "matcher.rt",
    "casino": "casino.rt",
    "casino_rec": "casino_rec.rt",
    "while_star": "while_star.rt",
}

# mutant name -> (base program, file); every mutant must fail verification
MUTANTS = {
    "even_odd_swapped": ("even_odd", "mutants/even_odd_swapped.rt"),
    "even_odd_weak_exit": ("even_odd", "mutants/even_odd_weak_exit.rt"),
    "matcher_no_abort": ("matcher", "mutants/matcher_no_abort.rt"),
    "matcher_skip_check": ("matcher", "mutants/matcher_skip_check.rt"),
    "casino_remove_after_bet": ("casino", "mutants/casino_remove_after_bet.rt"),
    "casino_drop_decide": ("casino", "mutants/casino_drop_decide.rt"),
    "casino_rec_remove_after_bet": ("casino_rec", "mutants/casino_rec_remove_after_bet.rt"),
    "casino_rec_drop_decide": ("casino_rec", "mutants/casino_rec_drop_decide.rt"),
    "while_star_paired": ("while_star", "mutants/while_star_paired.rt"),
    "while_star_double_emit": ("while_star", "mutants/while_star_double_emit.rt"),
}


def path(name: str) -> Path:
    """Filesystem path of a corpus program or mutant by registry name."""
    if name in CORPUS:
        rel = CORPUS[name]
    elif name in MUTANTS:
        rel = MUTANTS[name][1]
    else:
        raise KeyError(f"unknown corpus entry {name!r}")
    base = importlib.resources.files(__package__)
    return Path(str(base / rel))


def load_corpus(name: str) -> Program:
    return load_file(str(path(name)))
