"""Entailment checks, MV-Modus-Ponens, epistemic axioms and forward chaining.

Validity is decided by enumerating every knowledge interpretation of a small
Herbrand base (``4 ** n`` valuations).  ``T`` and ``Know`` atoms are never
enumerated: the evaluator derives them from the sentence they reify, so each
enumerated valuation is a knowledge interpretation by construction.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from itertools import product
from typing import Callable, Iterable, Iterator, Mapping, Sequence

from . import bilattice as bl
from .bilattice import BOT, F, T, TOP, VALUES, TruthValue
from .knowledge import (
    ME,
    PRESENT,
    KBError,
    Thesis,
    WorldState,
    register_sentence,
    reified_sentence,
)
from .semantics import (
    Domain,
    HerbrandValuation,
    SentenceHandle,
    depends_on,
    evaluate,
)
from .syntax import (
    KNOW_PRED,
    TRUTH_PRED,
    AbsTerm,
    Atom,
    Binary,
    Const,
    Equiv,
    Formula,
    Not,
    Quant,
    mk_abs,
    substitute,
    to_text,
)

__all__ = [
    "DEFAULT_CAP",
    "CapExceeded",
    "DeductionError",
    "Sequent",
    "ThesisSet",
    "Verdict",
    "valuations",
    "sequent_satisfied",
    "sequent_valid",
    "models_of",
    "entails",
    "entails_v",
    "MP_CASES",
    "mp_case_of",
    "mv_modus_ponens",
    "universal_instantiation",
    "axiom_instance",
    "apply_epistemic_axiom",
    "Step",
    "Derivation",
    "forward_chain",
    "register_paradox",
    "liar_formula",
    "liar_check",
    "ClosureReport",
    "closed_valuation_check",
]

DEFAULT_CAP = 8
DEFAULT_SAMPLES = 4096


class DeductionError(ValueError):
    pass


class CapExceeded(DeductionError):
    """The Herbrand base is too large for exhaustive enumeration."""


def _closed(f: Formula, what: str):
    if f.free_tuple:
        raise DeductionError(f"{what} {to_text(f)} is not a sentence")


@dataclass(frozen=True)
class Sequent:
    premises: tuple[Formula, ...]
    conclusion: Formula

    def __post_init__(self):
        object.__setattr__(self, "premises", tuple(self.premises))
        for p in self.premises:
            _closed(p, "premise")
        _closed(self.conclusion, "conclusion")

    def __str__(self):
        return f"{' ; '.join(to_text(p) for p in self.premises)} |- {to_text(self.conclusion)}"


@dataclass(frozen=True)
class ThesisSet:
    theses: tuple[Thesis, ...]

    def __post_init__(self):
        items = []
        for t in self.theses:
            items.append(t if isinstance(t, Thesis) else Thesis(*t))
        object.__setattr__(self, "theses", tuple(items))

    @classmethod
    def of(cls, *pairs) -> "ThesisSet":
        return cls(tuple(pairs))

    def __iter__(self):
        return iter(self.theses)

    def __len__(self):
        return len(self.theses)

    @property
    def formulas(self) -> list[Formula]:
        return [t.formula for t in self.theses]


@dataclass(frozen=True)
class Verdict:
    holds: bool
    exhaustive: bool
    countermodel: Mapping[Atom, TruthValue] | None = None
    checked: int = 0

    def __bool__(self):
        return self.holds

    def describe(self) -> str:
        word = "yes" if self.holds else "no"
        if not self.exhaustive:
            word += f" (sampled {self.checked} valuations, not exhaustive)"
        if self.countermodel is not None:
            cm = ", ".join(f"{to_text(a)}={v}" for a, v in self.countermodel.items())
            word += f"; countermodel: {cm or 'all atoms bot'}"
        return word


# --------------------------------------------------------------------------
# valuation enumeration
# --------------------------------------------------------------------------

def _template(v: HerbrandValuation | WorldState | Domain | None) -> HerbrandValuation:
    if v is None:
        return HerbrandValuation()
    if isinstance(v, WorldState):
        return v.valuation
    if isinstance(v, Domain):
        return HerbrandValuation(v)
    return v


def _base_for(template: HerbrandValuation, formulas, base) -> list[Atom]:
    if base is None:
        base = depends_on(template, formulas)
    return sorted(set(base), key=to_text)


def valuations(
    base: Iterable[Atom],
    template: HerbrandValuation | None = None,
    cap: int = DEFAULT_CAP,
    sample: bool = False,
    seed: int = 0,
    samples: int = DEFAULT_SAMPLES,
) -> tuple[Iterator[HerbrandValuation], bool]:
    """All valuations of ``base`` (every other atom unknown).

    Returns the iterator and whether it is exhaustive.  Past ``cap`` atoms
    this raises :class:`CapExceeded` unless ``sample`` is set, in which case
    ``samples`` seeded random valuations are drawn instead.
    """
    template = _template(template)
    atoms = sorted(set(base), key=to_text)

    def build(combo):
        return template.replace_values(dict(zip(atoms, combo)))

    if len(atoms) <= cap:
        return (build(c) for c in product(VALUES, repeat=len(atoms))), True
    if not sample:
        raise CapExceeded(f"Herbrand base has {len(atoms)} atoms, enumeration cap is {cap}")
    rng = random.Random(seed)
    return (build([rng.choice(VALUES) for _ in atoms]) for _ in range(samples)), False


def _explicit(v: HerbrandValuation, atoms) -> dict:
    return {a: v[a] for a in atoms}


# --------------------------------------------------------------------------
# sequents and entailment
# --------------------------------------------------------------------------

def sequent_satisfied(v, s: Sequent) -> bool:
    v = _template(v)
    lhs = bl.agg(bl.TRUTH, "meet", (evaluate(v, p) for p in s.premises))
    return bl.leq(bl.TRUTH, lhs, evaluate(v, s.conclusion))


def sequent_valid(
    s: Sequent,
    base: Iterable[Atom] | None = None,
    template=None,
    cap: int = DEFAULT_CAP,
    sample: bool = False,
    seed: int = 0,
) -> Verdict:
    """Whether ``s`` is satisfied by every knowledge interpretation of ``base``.

    ``base`` defaults to the ordinary atoms the sequent depends on.
    """
    template = _template(template)
    atoms = _base_for(template, list(s.premises) + [s.conclusion], base)
    vals, exhaustive = valuations(atoms, template, cap, sample, seed)
    n = 0
    for v in vals:
        n += 1
        if not sequent_satisfied(v, s):
            return Verdict(False, exhaustive, _explicit(v, atoms), n)
    return Verdict(True, exhaustive, None, n)


def _satisfies(v, gamma: ThesisSet) -> bool:
    return all(bl.leq(bl.TRUTH, th.bound, evaluate(v, th.formula)) for th in gamma)


def models_of(
    gamma: ThesisSet,
    base: Iterable[Atom] | None = None,
    template=None,
    cap: int = DEFAULT_CAP,
    sample: bool = False,
    seed: int = 0,
) -> list[HerbrandValuation]:
    """Knowledge interpretations meeting every lower bound of ``gamma``."""
    template = _template(template)
    atoms = _base_for(template, gamma.formulas, base)
    vals, _ = valuations(atoms, template, cap, sample, seed)
    return [v for v in vals if _satisfies(v, gamma)]


def entails_v(v, gamma: ThesisSet, psi: Formula) -> bool:
    """Under one valuation: some thesis is no truer than ``psi``."""
    v = _template(v)
    target = evaluate(v, psi)
    return any(bl.leq(bl.TRUTH, evaluate(v, th.formula), target) for th in gamma)


def entails(
    gamma: ThesisSet,
    psi: Formula,
    base: Iterable[Atom] | None = None,
    template=None,
    cap: int = DEFAULT_CAP,
    sample: bool = False,
    seed: int = 0,
) -> Verdict:
    """``entails_v`` in every model of ``gamma`` (the witness may vary per model)."""
    _closed(psi, "conclusion")
    template = _template(template)
    atoms = _base_for(template, gamma.formulas + [psi], base)
    vals, exhaustive = valuations(atoms, template, cap, sample, seed)
    n = 0
    for v in vals:
        if not _satisfies(v, gamma):
            continue
        n += 1
        if not entails_v(v, gamma, psi):
            return Verdict(False, exhaustive, _explicit(v, atoms), n)
    return Verdict(True, exhaustive, None, n)


# --------------------------------------------------------------------------
# MV-Modus-Ponens and instantiation
# --------------------------------------------------------------------------

# Admissible consequent values for each antecedent value when the
# implication is true.
MP_CASES: Mapping[TruthValue, frozenset] = {
    F: frozenset(VALUES),
    BOT: frozenset({BOT, T}),
    TOP: frozenset({TOP, T}),
    T: frozenset({T}),
}


def mp_case_of(v, phi: Formula, psi: Formula) -> TruthValue | None:
    """The case class (keyed by the antecedent value) that ``v`` falls in, if any."""
    v = _template(v)
    a, b = evaluate(v, phi), evaluate(v, psi)
    return a if b in MP_CASES[a] else None


def mv_modus_ponens(v, phi: Formula, impl: Formula) -> Formula | None:
    """Detach the consequent of ``impl`` when the implication is exactly true.

    Returns ``None`` (refusal) for any other implication value.
    """
    if not (isinstance(impl, Binary) and impl.op == "implies"):
        raise DeductionError(f"{to_text(impl)} is not an implication")
    if impl.left != phi:
        raise DeductionError(f"antecedent of {to_text(impl)} is not {to_text(phi)}")
    _closed(impl, "implication")
    v = _template(v)
    if evaluate(v, impl) is not T:
        return None
    psi = impl.right
    assert bl.leq(bl.TRUTH, evaluate(v, phi), evaluate(v, psi))
    return psi


def universal_instantiation(v, sentence: Formula, g: Mapping[str, str] | str) -> Formula:
    """Instance of a universal sentence; ``g`` names the bound variable's value."""
    if not (isinstance(sentence, Quant) and sentence.kind == "forall"):
        raise DeductionError(f"{to_text(sentence)} is not a universal sentence")
    _closed(sentence, "sentence")
    var = sentence.var
    if isinstance(g, str):
        g = {var: g}
    if var not in g:
        raise DeductionError(f"no value given for {var}")
    value = g[var]
    term = value if isinstance(value, (Const, AbsTerm)) else Const(value)
    return substitute(sentence.body, {var: term})


# --------------------------------------------------------------------------
# epistemic axioms
# --------------------------------------------------------------------------

def _know_parts(k) -> tuple[Const, Const, Formula]:
    if not (isinstance(k, Atom) and k.pred == KNOW_PRED):
        raise DeductionError(f"{to_text(k) if hasattr(k, 'pred') else k!r} is not a Know atom")
    try:
        body = reified_sentence(k)
    except KBError as exc:
        raise DeductionError(str(exc)) from None
    return k.args[0], k.args[1], body


def _rewrap(time, subject, sentence: Formula) -> Atom:
    return Atom(KNOW_PRED, (time, subject, mk_abs(sentence)))


def axiom_instance(kind: str, inputs: Sequence[Atom]) -> tuple[Formula, Formula]:
    """The derived sentence and the axiom instance (as a formula) for ``inputs``."""
    if kind == "T":
        (k,) = _expect(kind, inputs, 1)
        _, _, psi = _know_parts(k)
        return psi, Binary("implies", k, psi)
    if kind == "4":
        (k,) = _expect(kind, inputs, 1)
        time, subject, _ = _know_parts(k)
        out = _rewrap(time, subject, k)
        return out, Binary("implies", k, out)
    if kind == "K":
        k1, k2 = _expect(kind, inputs, 2)
        time, subject, psi = _know_parts(k1)
        time2, subject2, imp = _know_parts(k2)
        if (time2, subject2) != (time, subject):
            raise DeductionError("axiom K needs both Know atoms at the same time and subject")
        if not (isinstance(imp, Binary) and imp.op == "implies"):
            raise DeductionError(f"{to_text(imp)} is not an implication")
        if imp.left != psi:
            raise DeductionError(f"antecedent of {to_text(imp)} is not {to_text(psi)}")
        out = _rewrap(time, subject, imp.right)
        return out, Binary("implies", Binary("and", k1, k2), out)
    raise DeductionError(f"unknown epistemic axiom {kind!r} (expected T, 4 or K)")


def _expect(kind, inputs, n):
    inputs = tuple(inputs)
    if len(inputs) != n:
        raise DeductionError(f"axiom {kind} takes {n} Know atom(s), got {len(inputs)}")
    return inputs


def apply_epistemic_axiom(kind: str, state, inputs: Sequence[Atom]) -> Formula:
    """Apply axiom T, 4 or K; the instance must evaluate to ``t``."""
    out, inst = axiom_instance(kind, inputs)
    value = evaluate(_template(state), inst)
    if value is not T:
        raise DeductionError(f"axiom {kind} instance {to_text(inst)} evaluates to {value}")
    return out


# --------------------------------------------------------------------------
# forward chaining
# --------------------------------------------------------------------------

RULE_ORDER = ("axiom-T", "axiom-K", "MV-MP", "UI", "axiom-4")


class _OutOfFuel(Exception):
    pass


@dataclass(frozen=True)
class Step:
    n: int
    rule: str
    inputs: tuple[Formula, ...]
    output: Formula
    value: TruthValue

    def text(self) -> str:
        ins = ", ".join(to_text(i) for i in self.inputs)
        return f"step {self.n}: {self.rule} [{ins}] => {to_text(self.output)} (value {self.value})"


@dataclass
class Derivation:
    steps: list[Step] = field(default_factory=list)
    know: frozenset = frozenset()
    conclusions: tuple[Formula, ...] = ()
    exhausted: bool = False

    def lines(self) -> list[str]:
        out = [s.text() for s in self.steps]
        if self.exhausted:
            out.append("fuel exhausted before the closure was reached")
        return out

    def __str__(self):
        return "\n".join(self.lines())

    def validate(self, state) -> bool:
        """Re-check every step against the valuation of ``state``."""
        v = _template(state)
        for s in self.steps:
            if s.rule == "MV-MP":
                phi, impl = s.inputs
                psi = mv_modus_ponens(v, phi, impl)
                if psi is None or s.output != _wrap_like(phi, psi, s.output):
                    return False
            elif s.rule == "UI":
                continue
            else:
                kind = s.rule.split("-", 1)[1]
                try:
                    apply_epistemic_axiom(kind, v, s.inputs)
                except DeductionError:
                    return False
            if evaluate(v, s.output) is not s.value:
                return False
        return True


def _wrap_like(phi, psi, out):
    if isinstance(out, Atom) and out.pred == KNOW_PRED:
        return _rewrap(out.args[0], out.args[1], psi)
    return psi


def _know_depth(f) -> int:
    if isinstance(f, Atom) and f.pred == KNOW_PRED and isinstance(f.args[2], AbsTerm):
        return 1 + _know_depth(f.args[2].body)
    return 0


def _seeds(state: WorldState, tags) -> set[Atom]:
    time, subject = Const(tags[0]), Const(tags[1])
    seeds = set(state.derived_know)
    for r in state.rules:
        seeds.add(_rewrap(time, subject, r.formula))
    for a in state.valuation.values:
        seeds.add(_rewrap(time, subject, a))
    return seeds


def forward_chain(
    state: WorldState,
    fuel: int = 1000,
    depth_cap: int = 2,
    tags: tuple[str, str] = (PRESENT, ME),
    seeds: Iterable[Atom] | None = None,
) -> tuple[frozenset, Derivation]:
    """Close the known Know atoms under the epistemic axioms, MV-MP and UI.

    The seeds are the state's derived Know atoms plus ``Know(tags, <<s>>)``
    for every rule and every learned (non-unknown) atom.  Rules run in the
    fixed order T, K, MV-MP, UI, 4 and candidates in text order, so the
    result does not depend on how the inputs were listed.  Each new sentence
    costs one unit of fuel.  Returns the Know atoms beyond the seeds and
    the derivation.
    """
    if fuel < 0:
        raise DeductionError("fuel must be non-negative")
    v = state.valuation
    time, subject = Const(tags[0]), Const(tags[1])
    start = set(_seeds(state, tags) if seeds is None else seeds)
    know: set[Atom] = set(start)
    concluded: dict[Formula, None] = {}
    deriv = Derivation()
    budget = [fuel]

    def emit(rule, inputs, out, pool):
        if out in pool:
            return
        if budget[0] == 0:
            raise _OutOfFuel
        budget[0] -= 1
        if isinstance(pool, dict):
            pool[out] = None
        else:
            pool.add(out)
        deriv.steps.append(Step(len(deriv.steps) + 1, rule, tuple(inputs), out, evaluate(v, out)))

    def ordered(atoms):
        return sorted(atoms, key=to_text)

    def one_round():
        known = ordered(know)
        body = {k: _know_parts(k)[2] for k in known}
        for k in known:
            emit("axiom-T", [k], body[k], concluded)
        for k1 in known:
            for k2 in known:
                imp = body[k2]
                if (
                    isinstance(imp, Binary) and imp.op == "implies" and imp.left == body[k1]
                    and k1.args[:2] == k2.args[:2]
                ):
                    emit("axiom-K", [k1, k2], axiom_instance("K", [k1, k2])[0], know)
        sentences = {body[k] for k in known}
        for imp in ordered(sentences):
            if isinstance(imp, Binary) and imp.op == "implies" and imp.left in sentences:
                psi = mv_modus_ponens(v, imp.left, imp)
                if psi is not None:
                    emit("MV-MP", [imp.left, imp], _rewrap(time, subject, psi), know)
        for s in ordered(sentences):
            if isinstance(s, Quant) and s.kind == "forall":
                try:
                    elems = v.domain.range(_bound_kind(v, s))
                except ValueError:
                    continue
                for c in elems:
                    emit("UI", [s], _rewrap(time, subject, universal_instantiation(v, s, c)), know)
        for k in known:
            if _know_depth(k) < depth_cap:
                emit("axiom-4", [k], axiom_instance("4", [k])[0], know)

    try:
        while True:
            before = (len(know), len(concluded))
            one_round()
            if (len(know), len(concluded)) == before:
                break
    except _OutOfFuel:
        deriv.exhausted = True

    deriv.know = frozenset(know - start)
    deriv.conclusions = tuple(concluded)
    return deriv.know, deriv


def _bound_kind(v: HerbrandValuation, q: Quant):
    from .semantics import _var_kind

    return _var_kind(q.body, q.var, v.signatures)


# --------------------------------------------------------------------------
# paradoxes
# --------------------------------------------------------------------------

def register_paradox(state: WorldState, name: str, sentence: Formula, value: TruthValue = TOP) -> WorldState:
    """Register a built-in sentence pinned at ``value`` (``top`` for a paradox)."""
    try:
        return register_sentence(state, SentenceHandle(name, sentence, value))
    except KBError as exc:
        raise DeductionError(str(exc)) from None


def liar_formula(name: str = "liar") -> Formula:
    """The defining equivalence ``L <-> ~T(<<L>>)`` of a self-reference handle."""
    handle = Atom(name, ())
    return Equiv(handle, Not(Atom(TRUTH_PRED, (mk_abs(handle),))))


def liar_check(state, name: str = "liar") -> bool:
    """Whether the liar's defining equivalence holds (evaluates to ``t``)."""
    v = _template(state)
    h = v.handles.get(name)
    if h is None:
        raise DeductionError(f"no registered sentence named {name}")
    return evaluate(v, liar_formula(name)) is T


# --------------------------------------------------------------------------
# closed valuations
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class ClosureReport:
    ok: bool
    violation: str | None = None

    def __bool__(self):
        return self.ok


def closed_valuation_check(v, corpus: Iterable[Formula]) -> ClosureReport:
    """Check the three closure conditions of a valuation on ``corpus``.

    ``v`` is a valuation, a state, or any callable from sentences to values.
    The conditions: a conjunction is at least as informative as the meet of
    its conjuncts, negation commutes with valuation, and single-premise
    entailment (and a true implication) preserves truth.
    """
    if callable(v) and not isinstance(v, (HerbrandValuation, WorldState)):
        val: Callable = v
    else:
        template = _template(v)
        val = lambda f: evaluate(template, f)  # noqa: E731
    corpus = list(corpus)
    cache = {f: val(f) for f in corpus}
    for f, a in cache.items():
        neg = val(Not(f))
        if neg is not bl.negate(a):
            return ClosureReport(False, f"value of ~({to_text(f)}) is {neg}, expected {bl.negate(a)}")
    for f, g in product(corpus, repeat=2):
        a, b = cache[f], cache[g]
        c = val(Binary("and", f, g))
        if not bl.leq(bl.KNOWLEDGE, bl.k_meet(a, b), c):
            return ClosureReport(False, f"conjunction {to_text(f)} & {to_text(g)} has value {c}")
        if val(Binary("implies", f, g)) is T and not bl.leq(bl.TRUTH, a, b):
            return ClosureReport(False, f"{to_text(f)} -> {to_text(g)} is t but {a} is not below {b}")
    return ClosureReport(True)
