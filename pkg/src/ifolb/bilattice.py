"""Belnap's four-valued bilattice.

The values are ``t`` (true), ``f`` (false), ``bot`` (unknown) and ``top``
(inconsistent).  Two partial orders live on the same carrier:

* the truth order ``f <= bot, top <= t`` (``bot`` and ``top`` incomparable),
* the knowledge order ``bot <=k f, t <=k top`` (``f`` and ``t`` incomparable).

All binary operations are stored as literal tables.  At import time every
table is checked against a brute-force search over the declared order
relations, so a transcription error fails loudly instead of silently.
"""

from __future__ import annotations

import enum
from functools import reduce
from itertools import product
from typing import Iterable

__all__ = [
    "TruthValue",
    "T",
    "F",
    "BOT",
    "TOP",
    "VALUES",
    "TRUTH",
    "KNOWLEDGE",
    "negate",
    "truth_meet",
    "truth_join",
    "k_meet",
    "k_join",
    "implies",
    "equiv",
    "leq",
    "agg",
    "parse_value",
]


class TruthValue(enum.Enum):
    T = "t"
    F = "f"
    BOT = "bot"
    TOP = "top"

    def __str__(self) -> str:
        return self.value

    def __repr__(self) -> str:
        return self.value

    # Python operators follow the truth lattice.
    def __invert__(self) -> TruthValue:
        return negate(self)

    def __and__(self, other: TruthValue) -> TruthValue:
        return truth_meet(self, other)

    def __or__(self, other: TruthValue) -> TruthValue:
        return truth_join(self, other)


T = TruthValue.T
F = TruthValue.F
BOT = TruthValue.BOT
TOP = TruthValue.TOP
VALUES: tuple[TruthValue, ...] = (T, F, BOT, TOP)

TRUTH = "truth"
KNOWLEDGE = "knowledge"


def parse_value(text: str) -> TruthValue:
    """Read one of the literals ``t``, ``f``, ``bot``, ``top`` (case-sensitive)."""
    try:
        return TruthValue(text)
    except ValueError:
        raise ValueError(f"not a truth value literal: {text!r}") from None


# Order relations as sets of (smaller, larger) pairs, reflexive-transitive.
def _closure(cover: set[tuple[TruthValue, TruthValue]]) -> frozenset:
    rel = {(a, a) for a in VALUES} | set(cover)
    changed = True
    while changed:
        changed = False
        for (a, b), (c, d) in product(list(rel), list(rel)):
            if b == c and (a, d) not in rel:
                rel.add((a, d))
                changed = True
    return frozenset(rel)


_ORDERS = {
    TRUTH: _closure({(F, BOT), (F, TOP), (BOT, T), (TOP, T)}),
    KNOWLEDGE: _closure({(BOT, F), (BOT, T), (F, TOP), (T, TOP)}),
}
_BOTTOM = {TRUTH: F, KNOWLEDGE: BOT}
_TOP = {TRUTH: T, KNOWLEDGE: TOP}


def leq(order: str, a: TruthValue, b: TruthValue) -> bool:
    """Partial order test; ``order`` is ``"truth"`` or ``"knowledge"``."""
    try:
        return (a, b) in _ORDERS[order]
    except KeyError:
        raise ValueError(f"unknown order {order!r}") from None


_NEG = {T: F, F: T, BOT: BOT, TOP: TOP}

# Literal tables, row = left operand, column = right operand, order t f bot top.
_COLS = (T, F, BOT, TOP)


def _table(rows: dict[TruthValue, tuple[TruthValue, ...]]) -> dict:
    return {(a, b): rows[a][i] for a in VALUES for i, b in enumerate(_COLS)}


_AND = _table({
    T: (T, F, BOT, TOP),
    F: (F, F, F, F),
    BOT: (BOT, F, BOT, F),
    TOP: (TOP, F, F, TOP),
})
_OR = _table({
    T: (T, T, T, T),
    F: (T, F, BOT, TOP),
    BOT: (T, BOT, BOT, T),
    TOP: (T, TOP, T, TOP),
})
_KMEET = _table({
    T: (T, BOT, BOT, T),
    F: (BOT, F, BOT, F),
    BOT: (BOT, BOT, BOT, BOT),
    TOP: (T, F, BOT, TOP),
})
_KJOIN = _table({
    T: (T, TOP, T, TOP),
    F: (TOP, F, F, TOP),
    BOT: (T, F, BOT, TOP),
    TOP: (TOP, TOP, TOP, TOP),
})
# Relative pseudo-complement of the truth lattice.
_IMPL = _table({
    T: (T, F, BOT, TOP),
    F: (T, T, T, T),
    BOT: (T, TOP, T, TOP),
    TOP: (T, BOT, BOT, T),
})


def negate(a: TruthValue) -> TruthValue:
    return _NEG[a]


def truth_meet(a: TruthValue, b: TruthValue) -> TruthValue:
    return _AND[a, b]


def truth_join(a: TruthValue, b: TruthValue) -> TruthValue:
    return _OR[a, b]


def k_meet(a: TruthValue, b: TruthValue) -> TruthValue:
    return _KMEET[a, b]


def k_join(a: TruthValue, b: TruthValue) -> TruthValue:
    """Knowledge join; combining two pieces of evidence."""
    return _KJOIN[a, b]


def implies(a: TruthValue, b: TruthValue) -> TruthValue:
    return _IMPL[a, b]


def equiv(a: TruthValue, b: TruthValue) -> TruthValue:
    """Two-valued equivalence: ``t`` iff the values are identical."""
    return T if a is b else F


_PAIRWISE = {
    (TRUTH, "meet"): truth_meet,
    (TRUTH, "join"): truth_join,
    (KNOWLEDGE, "meet"): k_meet,
    (KNOWLEDGE, "join"): k_join,
}


def agg(order: str, kind: str, values: Iterable[TruthValue]) -> TruthValue:
    """Meet or join of a finite collection in the chosen order.

    The empty meet is the top of the order and the empty join its bottom.
    """
    try:
        op = _PAIRWISE[order, kind]
    except KeyError:
        raise ValueError(f"unknown aggregate {order}/{kind}") from None
    unit = _TOP[order] if kind == "meet" else _BOTTOM[order]
    return reduce(op, values, unit)


# -- startup validation -----------------------------------------------------

def _brute_glb(order, a, b):
    lower = [z for z in VALUES if leq(order, z, a) and leq(order, z, b)]
    (best,) = [z for z in lower if all(leq(order, y, z) for y in lower)]
    return best


def _brute_lub(order, a, b):
    upper = [z for z in VALUES if leq(order, a, z) and leq(order, b, z)]
    (best,) = [z for z in upper if all(leq(order, z, y) for y in upper)]
    return best


def _brute_impl(a, b):
    return agg(TRUTH, "join", [z for z in VALUES if leq(TRUTH, _brute_glb(TRUTH, z, a), b)])


def _validate() -> None:
    for a, b in product(VALUES, VALUES):
        checks = (
            (_AND, _brute_glb(TRUTH, a, b)),
            (_OR, _brute_lub(TRUTH, a, b)),
            (_KMEET, _brute_glb(KNOWLEDGE, a, b)),
            (_KJOIN, _brute_lub(KNOWLEDGE, a, b)),
        )
        for table, expected in checks:
            if table[a, b] is not expected:
                raise AssertionError(f"bilattice table entry ({a}, {b}) is wrong")
    # The implication is checked after the meet/join tables it depends on.
    for a, b in product(VALUES, VALUES):
        if _IMPL[a, b] is not _brute_impl(a, b):
            raise AssertionError(f"implication entry ({a}, {b}) is wrong")


_validate()
