"""Random states and learn sequences built through the public API."""

from ifolb.bilattice import F, T
from ifolb.knowledge import LearnEvent, PredicateDecl, new_state
from ifolb.syntax import Atom, Const

ELEMENTS = ("a", "b")
DECLS = (PredicateDecl("p", 1), PredicateDecl("q", 2), PredicateDecl("r", 0))


def fresh(elements=ELEMENTS, decls=DECLS):
    return new_state(list(elements), decls)


def rand_events(rng, state, n, start=None):
    atoms = sorted(state.base, key=str)
    ts = state.timestamp if start is None else start
    out = []
    for _ in range(n):
        ts += rng.randint(1, 3)
        out.append(LearnEvent(rng.choice(atoms), rng.choice((T, F)), ts))
    return out


def ground(pred, *args):
    return Atom(pred, tuple(Const(a) for a in args))
