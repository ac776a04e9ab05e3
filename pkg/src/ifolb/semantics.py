"""Herbrand valuations, the four-valued evaluator and m-extensions.

A :class:`HerbrandValuation` stores the values of ordinary ground atoms
(everything missing is ``bot``).  :func:`evaluate` extends it to all
sentences: connectives go through the bilattice tables, quantifiers take the
truth-lattice join/meet over the declared finite domain, and the
distinguished predicates ``T``/``Know`` return the value of the sentence they
reify.  :func:`extension` turns an open formula into its m-extension, a
relation whose last column is the (non-``bot``) truth value.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from itertools import product
from types import MappingProxyType
from typing import Iterable, Mapping

from . import bilattice as bl
from .bilattice import BOT, F, T, TruthValue
from .syntax import (
    ID_PRED,
    KNOW_PRED,
    TRUTH_PRED,
    WEAK_EQ_PRED,
    AbsTerm,
    Atom,
    Binary,
    Builtin,
    Const,
    Equiv,
    Formula,
    Not,
    Quant,
    Var,
    VirtualPredicate,
    substitute,
    to_text,
)

__all__ = [
    "INDIVIDUAL",
    "TIME",
    "NONMEANING",
    "CONCEPT",
    "ANY",
    "NON_MEANING_ELEMENT",
    "Domain",
    "Concept",
    "SentenceHandle",
    "HerbrandValuation",
    "MRelation",
    "EvaluationError",
    "CyclicReification",
    "UnboundedQuantification",
    "evaluate",
    "depends_on",
    "extension",
    "mv_interpret",
    "expand",
    "ext_leq",
    "ext_equiv",
    "relation_neg",
    "IntensionalInterpretation",
    "U_BOT",
    "canonical_h",
    "compose_check",
    "CheckReport",
]

INDIVIDUAL = "individual"
TIME = "time"
NONMEANING = "nonmeaning"
CONCEPT = "concept"
ANY = "any"
ELEMENT_KINDS = (INDIVIDUAL, TIME, NONMEANING)

# The element every non-meaningful constant denotes.
NON_MEANING_ELEMENT = "®"


class EvaluationError(ValueError):
    pass


class CyclicReification(EvaluationError):
    pass


class UnboundedQuantification(EvaluationError):
    pass


class Domain:
    """Finite, declared set of named elements, each of one kind.

    Quantifiers range over the elements of the kind required by the
    predicate signatures (or over all meaningful elements when unsorted).
    Non-meaningful constants all denote the single ``®`` element.
    """

    def __init__(self, elements: Mapping[str, str] | Iterable[str] = ()):
        if isinstance(elements, Mapping):
            items = list(elements.items())
        else:
            items = [(name, INDIVIDUAL) for name in elements]
        self._kinds: dict[str, str] = {}
        for name, kind in items:
            if kind not in ELEMENT_KINDS:
                raise ValueError(f"unknown element kind {kind!r}")
            self._kinds[name] = kind

    @property
    def elements(self) -> tuple[str, ...]:
        return tuple(self._kinds)

    @property
    def kinds(self) -> Mapping[str, str]:
        return MappingProxyType(self._kinds)

    def kind_of(self, name: str) -> str | None:
        return self._kinds.get(name)

    def is_nonmeaning(self, name: str) -> bool:
        return self._kinds.get(name) == NONMEANING

    def range(self, kind: str | None = None) -> tuple[str, ...]:
        if kind in (None, ANY):
            return tuple(n for n, k in self._kinds.items() if k != NONMEANING)
        if kind == CONCEPT:
            raise UnboundedQuantification("cannot quantify over concepts: the sort is not finite")
        return tuple(n for n, k in self._kinds.items() if k == kind)

    def with_elements(self, elements: Mapping[str, str]) -> "Domain":
        merged = dict(self._kinds)
        for name, kind in elements.items():
            if merged.get(name, kind) != kind:
                raise ValueError(f"element {name} already declared as {merged[name]}")
            merged[name] = kind
        return Domain(merged)

    def __eq__(self, other):
        return isinstance(other, Domain) and self._kinds == other._kinds

    def __hash__(self):
        return hash(tuple(self._kinds.items()))

    def __repr__(self):
        return f"Domain({self._kinds!r})"


@dataclass(frozen=True)
class Concept:
    """Intensional entity; degree 1 is an L-concept (the meaning of a sentence)."""

    id: str
    degree: int


@dataclass(frozen=True)
class SentenceHandle:
    """A named built-in sentence.

    With a pinned ``value`` the handle always takes that value (a registered
    paradox is pinned at ``top``).  Without one, the handle stands for
    ``body`` and evaluates to it.
    """

    name: str
    body: Formula
    value: TruthValue | None = None


def _frozen(mapping) -> Mapping:
    return MappingProxyType(dict(mapping))


@dataclass(frozen=True, eq=False)
class HerbrandValuation:
    """Map from ordinary ground atoms to truth values, ``bot`` by default.

    Built-in letters, ``id`` and the reifying predicates are never stored;
    their values are fixed or derived by :func:`evaluate`.
    """

    domain: Domain = field(default_factory=Domain)
    values: Mapping[Atom, TruthValue] = field(default_factory=dict)
    base: frozenset = frozenset()
    signatures: Mapping[str, tuple[str, ...]] = field(default_factory=dict)
    handles: Mapping[str, SentenceHandle] = field(default_factory=dict)
    weak_eq: Mapping[tuple[str, str], TruthValue] = field(default_factory=dict)

    def __post_init__(self):
        clean = {a: v for a, v in self.values.items() if v is not BOT}
        for a in clean:
            if _is_special(a, self.handles):
                raise EvaluationError(f"{to_text(a)} has a fixed or derived value and cannot be stored")
        object.__setattr__(self, "values", _frozen(clean))
        object.__setattr__(self, "base", frozenset(self.base) | frozenset(clean))
        object.__setattr__(self, "signatures", _frozen(self.signatures))
        object.__setattr__(self, "handles", _frozen(self.handles))
        object.__setattr__(self, "weak_eq", _frozen(self.weak_eq))

    def __getitem__(self, a: Atom) -> TruthValue:
        return self.values.get(a, BOT)

    def with_values(self, updates: Mapping[Atom, TruthValue]) -> "HerbrandValuation":
        merged = dict(self.values)
        merged.update(updates)
        return replace(self, values=merged, base=self.base | frozenset(updates))

    def replace_values(self, values: Mapping[Atom, TruthValue]) -> "HerbrandValuation":
        return replace(self, values=values)

    def with_handle(self, handle: SentenceHandle) -> "HerbrandValuation":
        handles = dict(self.handles)
        handles[handle.name] = handle
        return replace(self, handles=handles)

    def __eq__(self, other):
        if not isinstance(other, HerbrandValuation):
            return NotImplemented
        return (
            self.domain == other.domain
            and dict(self.values) == dict(other.values)
            and self.base == other.base
            and dict(self.signatures) == dict(other.signatures)
            and dict(self.handles) == dict(other.handles)
            and dict(self.weak_eq) == dict(other.weak_eq)
        )

    __hash__ = None


def _is_special(a: Atom, handles: Mapping[str, SentenceHandle]) -> bool:
    if a.pred in (TRUTH_PRED, KNOW_PRED, ID_PRED, WEAK_EQ_PRED):
        return True
    return not a.args and a.pred in handles


# --------------------------------------------------------------------------
# evaluation
# --------------------------------------------------------------------------

def _var_kind(f, var: str, signatures: Mapping[str, tuple[str, ...]]) -> str | None:
    """Sort of ``var`` as fixed by the first signed argument slot it fills."""
    if isinstance(f, Atom):
        sig = signatures.get(f.pred)
        for i, a in enumerate(f.args):
            if isinstance(a, Var) and a.name == var and sig and i < len(sig) and sig[i] != ANY:
                return sig[i]
            if isinstance(a, AbsTerm) and var in a.visible:
                k = _var_kind(a.body, var, signatures)
                if k:
                    return k
        return None
    if isinstance(f, Not):
        return _var_kind(f.body, var, signatures)
    if isinstance(f, (Binary, Equiv)):
        return _var_kind(f.left, var, signatures) or _var_kind(f.right, var, signatures)
    if isinstance(f, Quant):
        if f.var == var:
            return None
        return _var_kind(f.body, var, signatures)
    return None


class _Evaluator:
    def __init__(self, v: HerbrandValuation, trace: set | None = None):
        self.v = v
        self.trace = trace
        self.active: list[str] = []

    def run(self, f, g: Mapping[str, str]) -> TruthValue:
        if isinstance(f, Atom):
            return self.atom(self.ground(f, g))
        if isinstance(f, Builtin):
            return f.value
        if isinstance(f, Not):
            return bl.negate(self.run(f.body, g))
        if isinstance(f, Binary):
            a, b = self.run(f.left, g), self.run(f.right, g)
            if f.op == "and":
                return bl.truth_meet(a, b)
            if f.op == "or":
                return bl.truth_join(a, b)
            return bl.implies(a, b)
        if isinstance(f, Equiv):
            return bl.equiv(self.run(f.left, g), self.run(f.right, g))
        if isinstance(f, Quant):
            var = f.var
            kind = _var_kind(f.body, var, self.v.signatures)
            rng = self.v.domain.range(kind)
            vals = []
            for e in rng:
                g1 = dict(g)
                g1[var] = e
                vals.append(self.run(f.body, g1))
            return bl.agg(bl.TRUTH, "join" if f.kind == "exists" else "meet", vals)
        raise TypeError(f"cannot evaluate {f!r}")

    def ground(self, a: Atom, g: Mapping[str, str]) -> Atom:
        if not a.free_tuple:
            return a
        missing = [x for x in a.free_tuple if x not in g]
        if missing:
            raise EvaluationError(f"free variable(s) {missing} unassigned in {to_text(a)}")
        terms = {x: Const(g[x]) for x in a.free_tuple}
        return substitute(a, terms)

    def reified(self, term) -> TruthValue:
        # Value of T(t) / Know(_, _, t): the reified sentence, f for non-sentences.
        if isinstance(term, AbsTerm) and not term.hidden and not term.visible:
            return self.run(term.body, {})
        return F

    def atom(self, a: Atom) -> TruthValue:
        v = self.v
        for t in a.args:
            if isinstance(t, Const) and v.domain.is_nonmeaning(t.name):
                return BOT
        if a.pred == ID_PRED and a.arity == 2:
            return T if a.args[0] == a.args[1] else F
        if a.pred == WEAK_EQ_PRED and a.arity == 2:
            return v.weak_eq.get((to_text(a.args[0]), to_text(a.args[1])), BOT)
        if a.pred == TRUTH_PRED and a.arity == 1:
            return self.reified(a.args[0])
        if a.pred == KNOW_PRED and a.arity == 3:
            return self.reified(a.args[2])
        if not a.args and a.pred in v.handles:
            h = v.handles[a.pred]
            if h.value is not None:
                return h.value
            if h.name in self.active:
                chain = " -> ".join(self.active + [h.name])
                raise CyclicReification(
                    f"self-referential sentence {h.name} is not a registered paradox ({chain})"
                )
            self.active.append(h.name)
            try:
                return self.run(h.body, {})
            finally:
                self.active.pop()
        if self.trace is not None:
            self.trace.add(a)
        return v.values.get(a, BOT)


def evaluate(v: HerbrandValuation, f: Formula, g: Mapping[str, str] | None = None) -> TruthValue:
    """Truth value of ``f`` under ``v`` and assignment ``g`` (variable -> element)."""
    return _Evaluator(v).run(f, g or {})


def depends_on(v: HerbrandValuation, formulas: Iterable[Formula]) -> frozenset:
    """Ordinary ground atoms whose values the given sentences read."""
    seen: set = set()
    ev = _Evaluator(v, trace=seen)
    for f in formulas:
        ev.run(f, {})
    return frozenset(seen)


# --------------------------------------------------------------------------
# m-extensions
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class MRelation:
    """Relation whose last column is a non-``bot`` truth value, functional in it."""

    arity: int
    tuples: frozenset = frozenset()

    def __post_init__(self):
        if self.arity < 1:
            raise ValueError("m-relations have arity >= 1")
        tuples = frozenset(tuple(t) for t in self.tuples)
        seen: dict = {}
        for t in tuples:
            if len(t) != self.arity:
                raise ValueError(f"tuple {t} does not have arity {self.arity}")
            a = t[-1]
            if not isinstance(a, TruthValue) or a is BOT:
                raise ValueError(f"last component of {t} must be a known truth value")
            if seen.setdefault(t[:-1], a) is not a:
                raise ValueError(f"relation is not functional at {t[:-1]}")
        object.__setattr__(self, "tuples", tuples)

    @classmethod
    def singleton(cls, a: TruthValue) -> "MRelation":
        """Element of X~: ``{a}`` or the empty relation for ``bot``."""
        return cls(1, frozenset() if a is BOT else frozenset({(a,)}))

    def __len__(self):
        return len(self.tuples)

    def __iter__(self):
        return iter(sorted(self.tuples, key=_tuple_key))

    def __contains__(self, t):
        return tuple(t) in self.tuples

    @property
    def is_empty(self) -> bool:
        return not self.tuples

    def lookup(self, data: tuple) -> TruthValue:
        for t in self.tuples:
            if t[:-1] == tuple(data):
                return t[-1]
        return BOT

    def projected(self) -> frozenset:
        """The tuples with the truth column dropped."""
        return frozenset(t[:-1] for t in self.tuples)


def _tuple_key(t):
    return tuple(str(x) for x in t)


def _assignments(v: HerbrandValuation, f: Formula):
    fv = f.free_tuple
    ranges = [v.domain.range(_var_kind(f, x, v.signatures)) for x in fv]
    for combo in product(*ranges):
        yield dict(zip(fv, combo))


def extension(v: HerbrandValuation, vp) -> MRelation:
    """m-extension of a virtual predicate: ``(g(x1),...,g(xk), a)`` for every ``a != bot``."""
    f = vp.formula if isinstance(vp, VirtualPredicate) else vp
    fv = f.free_tuple
    ev = _Evaluator(v)
    rows = set()
    for g in _assignments(v, f):
        a = ev.run(f, g)
        if a is not BOT:
            rows.add(tuple(g[x] for x in fv) + (a,))
    return MRelation(len(fv) + 1, frozenset(rows))


def mv_interpret(v: HerbrandValuation, f: Formula) -> MRelation:
    """Sentences go to X~ (``{a}`` or empty); open formulas to their extension."""
    if f.free_tuple:
        return extension(v, f)
    return MRelation.singleton(evaluate(v, f))


def expand(R: MRelation, m: int, domain: Iterable[str]) -> MRelation:
    """Pad the data columns of ``R`` with every tuple over ``domain`` up to arity ``m``."""
    k = R.arity
    if m < k:
        raise ValueError(f"cannot expand arity {k} relation to {m}")
    if m == k or R.is_empty:
        return R
    pads = list(product(tuple(domain), repeat=m - k))
    rows = {t[:-1] + p + (t[-1],) for t in R.tuples for p in pads}
    return MRelation(m, frozenset(rows))


def _universe(domain, *rels: MRelation) -> list:
    elems = list(domain.elements if isinstance(domain, Domain) else domain)
    seen = set(elems)
    for R in rels:
        for t in R.tuples:
            for x in t[:-1]:
                if x not in seen:
                    seen.add(x)
                    elems.append(x)
    return elems


def ext_leq(R1: MRelation, R2: MRelation, domain=()) -> bool:
    """Extensional preorder: ``R1`` is at most as true as ``R2`` after expansion."""
    if R1.is_empty:
        return True
    if R2.is_empty:
        return False
    m = max(R1.arity, R2.arity)
    universe = _universe(domain, R1, R2)
    E2 = expand(R2, m, universe)
    best = {t[:-1]: t[-1] for t in E2.tuples}
    for t in expand(R1, m, universe).tuples:
        b = best.get(t[:-1])
        if b is None or not bl.leq(bl.TRUTH, t[-1], b):
            return False
    return True


def ext_equiv(R1: MRelation, R2: MRelation, domain=()) -> bool:
    return ext_leq(R1, R2, domain) and ext_leq(R2, R1, domain)


def relation_neg(R: MRelation) -> MRelation:
    """Negation lifted to X~: ``{a}`` goes to ``{~a}``, the empty relation stays empty."""
    if R.arity != 1:
        raise ValueError("relation negation is defined on unary relations only")
    if len(R) > 1:
        raise ValueError("unary m-relation has more than one tuple")
    if R.is_empty:
        return R
    (a,) = next(iter(R.tuples))
    return MRelation.singleton(bl.negate(a))


# --------------------------------------------------------------------------
# intensional interpretation and the h o I composition
# --------------------------------------------------------------------------

U_BOT = Concept("u_bot", 1)


class IntensionalInterpretation:
    """Names formulas by concepts and constants by domain elements.

    Sentences get degree-1 L-concepts; an open formula with ``m`` free
    variables gets a concept of degree ``m + 1``.  Ground atoms mentioning a
    non-meaningful constant all collapse to the unknown L-concept ``u_bot``.
    """

    def __init__(self, domain: Domain):
        self.domain = domain

    def constant(self, name: str) -> str:
        return NON_MEANING_ELEMENT if self.domain.is_nonmeaning(name) else name

    def concept(self, f: Formula) -> Concept:
        if isinstance(f, Builtin):
            return Concept(f"u_{f.value.value}", 1)
        if isinstance(f, Atom) and any(
            isinstance(t, Const) and self.constant(t.name) == NON_MEANING_ELEMENT for t in f.args
        ):
            return U_BOT
        return Concept(to_text(f), len(f.free_tuple) + 1)


def canonical_h(I: IntensionalInterpretation, v: HerbrandValuation, corpus: Iterable[Formula]) -> dict:
    """The extensionalization that makes ``h o I`` agree with ``v`` on ``corpus``."""
    h: dict = {U_BOT: MRelation(1)}
    for a in bl.VALUES:
        h[Concept(f"u_{a.value}", 1)] = MRelation.singleton(a)
    for f in corpus:
        h[I.concept(f)] = mv_interpret(v, f)
    return h


@dataclass(frozen=True)
class CheckReport:
    ok: bool
    violation: str | None = None

    def __bool__(self):
        return self.ok


def compose_check(
    I: IntensionalInterpretation,
    h: Mapping[Concept, MRelation],
    v: HerbrandValuation,
    corpus: Iterable[Formula],
) -> CheckReport:
    """Check ``h(I(phi)) == I*_B(phi)`` for every formula of ``corpus``."""
    for f in corpus:
        c = I.concept(f)
        expected = mv_interpret(v, f)
        got = h.get(c)
        if got is None:
            return CheckReport(False, f"h is undefined on the concept of {to_text(f)}")
        if got != expected:
            return CheckReport(
                False,
                f"h(I({to_text(f)})) = {sorted(got.tuples, key=_tuple_key)} "
                f"but the valuation gives {sorted(expected.tuples, key=_tuple_key)}",
            )
    return CheckReport(True)

