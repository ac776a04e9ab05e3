"""The robot's knowledge database: versioned states, learning and persistence.

A :class:`WorldState` is an immutable snapshot.  Learning combines the stored
value of an atom with the new evidence by knowledge join, so every step can
only move up the knowledge order::

    bot -> f, bot -> t, f -> top, t -> top, top -> top

Knowledge files are line oriented (``#`` starts a comment)::

    version 1
    domain <individual|time|nonmeaning> <name>...
    pred <name>/<arity> [sig <kind>,...]
    paradox <name> [= <value>] : <formula>
    define <name> : <formula>
    rule <formula> [>= <value>]
    fact <atom> = t|f|top @ <timestamp>
    derived <Know atom>
    weak_eq <term> <term> = <value>

Fact lines are replayed in order as learn events; consecutive lines with the
same timestamp form one batch.
"""

from __future__ import annotations

import io
import os
import re
from dataclasses import dataclass, field, replace
from datetime import datetime
from itertools import product
from types import MappingProxyType
from typing import Iterable, Mapping

from . import bilattice as bl
from .bilattice import BOT, F, T, TOP, TruthValue, parse_value
from .semantics import (
    ANY,
    CONCEPT,
    INDIVIDUAL,
    NONMEANING,
    TIME,
    Domain,
    HerbrandValuation,
    IntensionalInterpretation,
    MRelation,
    SentenceHandle,
    evaluate,
)
from .syntax import (
    DISTINGUISHED,
    ID_PRED,
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
    Var,
    Builtin,
    mk_abs,
    parse,
    to_text,
)

__all__ = [
    "KBError",
    "PredicateDecl",
    "Thesis",
    "LearnEvent",
    "WorldState",
    "KnowledgeDB",
    "SIGNATURE_KINDS",
    "new_state",
    "declare",
    "check_formula",
    "herbrand_base",
    "learn",
    "step_fk",
    "k_leq_val",
    "t_leq_val",
    "is_saturated",
    "build_kdb",
    "cka_value",
    "eval_reified",
    "know_atom",
    "reified_sentence",
    "dnknow",
    "truth_concept_ext",
    "dumps",
    "loads",
    "persist",
    "restore",
    "FORMAT_VERSION",
    "PRESENT",
    "PAST",
    "FUTURE",
    "ME",
]

FORMAT_VERSION = 1
SIGNATURE_KINDS = (INDIVIDUAL, TIME, CONCEPT, ANY)

PRESENT, PAST, FUTURE = "in-present", "in-past", "in-future"
ME = "me"


class KBError(ValueError):
    """Invalid knowledge operation or malformed knowledge file."""


@dataclass(frozen=True)
class PredicateDecl:
    name: str
    arity: int
    sig: tuple[str, ...] | None = None

    def __post_init__(self):
        if self.sig is not None:
            if len(self.sig) != self.arity:
                raise KBError(f"signature of {self.name}/{self.arity} has {len(self.sig)} kinds")
            bad = [k for k in self.sig if k not in SIGNATURE_KINDS]
            if bad:
                raise KBError(f"unknown argument kind(s) {bad}")

    def text(self) -> str:
        s = f"pred {self.name}/{self.arity}"
        if self.sig:
            s += " sig " + ",".join(self.sig)
        return s


@dataclass(frozen=True)
class Thesis:
    """A sentence with a lower bound on its truth value."""

    formula: Formula
    bound: TruthValue = T

    def __post_init__(self):
        if self.formula.free_tuple:
            raise KBError(f"thesis {to_text(self.formula)} is not a sentence")


@dataclass(frozen=True)
class LearnEvent:
    atom: Atom
    value: TruthValue
    timestamp: int

    def __post_init__(self):
        if self.value not in (T, F):
            raise KBError(f"learned evidence must be t or f, not {self.value}")
        if self.atom.free_tuple:
            raise KBError(f"cannot learn the open atom {to_text(self.atom)}")


@dataclass(frozen=True)
class WorldState:
    """Immutable snapshot of everything the robot knows at one time tag."""

    valuation: HerbrandValuation
    predicates: Mapping[str, PredicateDecl] = field(default_factory=dict)
    timestamp: int = 0
    history: tuple[LearnEvent, ...] = ()
    derived_know: frozenset = frozenset()
    rules: tuple[Thesis, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "predicates", MappingProxyType(dict(self.predicates)))

    def __eq__(self, other):
        if not isinstance(other, WorldState):
            return NotImplemented
        return (
            self.valuation == other.valuation
            and dict(self.predicates) == dict(other.predicates)
            and self.timestamp == other.timestamp
            and self.history == other.history
            and self.derived_know == other.derived_know
            and self.rules == other.rules
        )

    __hash__ = None

    @property
    def domain(self) -> Domain:
        return self.valuation.domain

    @property
    def base(self) -> frozenset:
        return self.valuation.base

    @property
    def paradoxes(self) -> Mapping[str, SentenceHandle]:
        return {n: h for n, h in self.valuation.handles.items() if h.value is not None}

    def value(self, a: Atom) -> TruthValue:
        return self.valuation[a]

    def evaluate(self, f: Formula) -> TruthValue:
        return evaluate(self.valuation, f)


# --------------------------------------------------------------------------
# language declarations
# --------------------------------------------------------------------------

def _signatures(preds: Mapping[str, PredicateDecl]) -> dict:
    sigs = {n: p.sig for n, p in preds.items() if p.sig}
    sigs.setdefault(KNOW_PRED, (TIME, INDIVIDUAL, CONCEPT))
    sigs.setdefault(TRUTH_PRED, (CONCEPT,))
    return sigs


def herbrand_base(domain: Domain, preds: Mapping[str, PredicateDecl], handles=()) -> frozenset:
    """Enumerable part of H0: ground atoms of ordinary predicates over the domain.

    Predicates with a concept argument have no finite enumeration; their
    atoms join the base when they are learned.
    """
    atoms = set()
    for p in preds.values():
        if p.name in DISTINGUISHED or (p.arity == 0 and p.name in handles):
            continue
        kinds = p.sig or (None,) * p.arity
        if CONCEPT in kinds:
            continue
        ranges = [domain.range(k) for k in kinds]
        for combo in product(*ranges):
            atoms.add(Atom(p.name, tuple(Const(c) for c in combo)))
    return frozenset(atoms)


def new_state(
    domain: Domain | Mapping[str, str] | Iterable[str] = (),
    predicates: Iterable[PredicateDecl] | Mapping[str, PredicateDecl] = (),
    rules: Iterable[Thesis] = (),
) -> WorldState:
    """Fresh state at time 0 in which every atom of H0 is unknown."""
    if not isinstance(domain, Domain):
        domain = Domain(domain)
    if not isinstance(predicates, Mapping):
        predicates = {p.name: p for p in predicates}
    for p in predicates.values():
        _check_decl(p)
    v = HerbrandValuation(domain, {}, herbrand_base(domain, predicates), _signatures(predicates))
    return WorldState(v, predicates, rules=tuple(rules))


def _check_decl(p: PredicateDecl):
    if p.name in DISTINGUISHED and DISTINGUISHED[p.name] != p.arity:
        raise KBError(f"{p.name} is distinguished with arity {DISTINGUISHED[p.name]}")


def declare(
    state: WorldState,
    elements: Mapping[str, str] | None = None,
    predicates: Iterable[PredicateDecl] = (),
) -> WorldState:
    """Extend the language; new atoms start unknown."""
    domain = state.domain.with_elements(elements or {})
    preds = dict(state.predicates)
    for p in predicates:
        _check_decl(p)
        old = preds.get(p.name)
        if old is not None and old != p:
            raise KBError(f"predicate {p.name} already declared as {old.name}/{old.arity}")
        preds[p.name] = p
    base = herbrand_base(domain, preds, state.valuation.handles) | state.valuation.base
    v = replace(state.valuation, domain=domain, base=base, signatures=_signatures(preds))
    return replace(state, valuation=v, predicates=preds)


def _check_term(state: WorldState, t, kind: str | None, where: str):
    if isinstance(t, Var):
        return
    if isinstance(t, AbsTerm):
        if kind not in (None, ANY, CONCEPT):
            raise KBError(f"{where}: abstraction term where a {kind} is expected")
        check_formula(state, t.body)
        return
    ek = state.domain.kind_of(t.name)
    if ek is None:
        raise KBError(f"{where}: unknown constant {t.name}")
    if ek == NONMEANING:
        return
    if kind == CONCEPT:
        raise KBError(f"{where}: constant {t.name} where an abstraction term is expected")
    if kind not in (None, ANY) and ek != kind:
        raise KBError(f"{where}: {t.name} is a {ek}, expected {kind}")


def check_formula(state: WorldState, f) -> None:
    """Reject undeclared predicates, wrong arities and ill-sorted arguments."""
    if isinstance(f, Atom):
        handles = state.valuation.handles
        if not f.args and f.pred in handles:
            return
        if f.pred in DISTINGUISHED:
            arity = DISTINGUISHED[f.pred]
            sig = _signatures(state.predicates).get(f.pred)
        else:
            decl = state.predicates.get(f.pred)
            if decl is None:
                raise KBError(f"unknown predicate {f.pred}")
            arity, sig = decl.arity, decl.sig
        if f.arity != arity:
            raise KBError(f"{f.pred} has arity {arity}, used with {f.arity} argument(s)")
        for i, t in enumerate(f.args):
            _check_term(state, t, sig[i] if sig else None, to_text(f))
    elif isinstance(f, Not):
        check_formula(state, f.body)
    elif isinstance(f, (Binary, Equiv)):
        check_formula(state, f.left)
        check_formula(state, f.right)
    elif isinstance(f, Quant):
        check_formula(state, f.body)
    elif isinstance(f, Builtin):
        return
    else:
        raise TypeError(f"not a formula: {f!r}")


# --------------------------------------------------------------------------
# learning
# --------------------------------------------------------------------------

def _check_learnable(state: WorldState, a: Atom):
    if a.pred in DISTINGUISHED:
        raise KBError(f"{to_text(a)}: {a.pred} atoms are built-in or derived and cannot be learned")
    if not a.args and a.pred in state.valuation.handles:
        raise KBError(f"{a.pred} is a registered sentence and cannot be learned")
    check_formula(state, a)


def step_fk(state: WorldState, events: Iterable[LearnEvent]) -> WorldState:
    """Apply one batch of evidence, all stamped after the current time tag."""
    events = list(events)
    if not events:
        return state
    values = dict(state.valuation.values)
    for e in events:
        if e.timestamp <= state.timestamp:
            raise KBError(
                f"timestamp {e.timestamp} does not follow the state's time tag {state.timestamp}"
            )
        _check_learnable(state, e.atom)
        values[e.atom] = bl.k_join(values.get(e.atom, BOT), e.value)
    v = state.valuation.with_values(values)
    return replace(
        state,
        valuation=v,
        timestamp=max(e.timestamp for e in events),
        history=state.history + tuple(events),
    )


def learn(state: WorldState, e: LearnEvent) -> WorldState:
    return step_fk(state, [e])


def _check_comparable(v1: HerbrandValuation, v2: HerbrandValuation):
    if v1.domain != v2.domain:
        raise KBError("valuations over different domains are not comparable")


def _pointwise(order: str, v1: HerbrandValuation, v2: HerbrandValuation) -> bool:
    _check_comparable(v1, v2)
    return all(bl.leq(order, v1[a], v2[a]) for a in v1.base | v2.base)


def k_leq_val(v1, v2) -> bool:
    """Knowledge order on valuations, pointwise over the ordinary atoms H0."""
    v1 = v1.valuation if isinstance(v1, WorldState) else v1
    v2 = v2.valuation if isinstance(v2, WorldState) else v2
    return _pointwise(bl.KNOWLEDGE, v1, v2)


def t_leq_val(v1, v2) -> bool:
    v1 = v1.valuation if isinstance(v1, WorldState) else v1
    v2 = v2.valuation if isinstance(v2, WorldState) else v2
    return _pointwise(bl.TRUTH, v1, v2)


def is_saturated(state: WorldState) -> tuple[bool, frozenset]:
    """Whether no atom of H0 is still unknown, and the unknown ones."""
    unknown = frozenset(a for a in state.base if state.value(a) is BOT)
    return not unknown, unknown


# --------------------------------------------------------------------------
# knowledge database
# --------------------------------------------------------------------------

def _datum(t) -> str:
    return t.name if isinstance(t, Const) else to_text(t)


@dataclass(frozen=True)
class KnowledgeDB:
    """Current m-extensions of the robot's concepts.

    ``relations`` keeps the truth column (the metaknowledge); ``projected``
    drops it and is the knowledge database proper.  ``fixed`` holds the
    extensions of built-in predicates, which never change.
    """

    relations: Mapping[str, MRelation]
    fixed: Mapping[str, MRelation] = field(default_factory=dict)

    @property
    def metaknowledge(self) -> dict[str, MRelation]:
        return {n: R for n, R in self.relations.items() if R.arity >= 2}

    @property
    def projected(self) -> dict[str, frozenset]:
        return {n: R.projected() for n, R in self.metaknowledge.items()}

    def contains(self, a: Atom) -> bool:
        """Whether the tuple of ``a`` is a known fact."""
        R = self.relations.get(a.pred)
        if R is None:
            return False
        if R.arity == 1:
            return not R.is_empty
        return tuple(_datum(t) for t in a.args) in R.projected()

    def __len__(self):
        return sum(len(R) for R in self.relations.values())


def build_kdb(state: WorldState) -> KnowledgeDB:
    rows: dict[str, set] = {n: set() for n, p in state.predicates.items() if n not in DISTINGUISHED}
    for a, val in state.valuation.values.items():
        rows.setdefault(a.pred, set()).add(tuple(_datum(t) for t in a.args) + (val,))
    arities = {n: p.arity for n, p in state.predicates.items()}
    relations = {}
    for n, r in rows.items():
        arity = arities.get(n)
        if arity is None:
            arity = len(next(iter(r))) - 1
        relations[n] = MRelation(arity + 1, frozenset(r))
    elems = state.domain.range()
    ident = {(x, y, T if x == y else F) for x in elems for y in elems}
    return KnowledgeDB(relations, {ID_PRED: MRelation(3, frozenset(ident))})


def cka_value(state: WorldState, a: Atom) -> TruthValue:
    """Value of a ground atom under the closed knowledge assumption."""
    if a.free_tuple:
        raise KBError(f"{to_text(a)} is not ground")
    if a.pred not in state.predicates and a.pred not in DISTINGUISHED:
        raise KBError(f"unknown predicate {a.pred}")
    if a.pred in DISTINGUISHED:
        return evaluate(state.valuation, a)
    return state.value(a)


def reified_sentence(a: Atom) -> Formula:
    """The sentence inside a ground ``T``/``Know`` atom."""
    if a.pred == TRUTH_PRED and a.arity == 1:
        term = a.args[0]
    elif a.pred == KNOW_PRED and a.arity == 3:
        term = a.args[2]
    else:
        raise KBError(f"{to_text(a)} is not a T or Know atom")
    if not isinstance(term, AbsTerm):
        raise KBError(f"{to_text(a)}: the reified argument must be an abstraction term")
    if term.hidden or term.visible:
        raise KBError(f"{to_text(a)}: the reified formula is not a sentence")
    return term.body


def eval_reified(state: WorldState, a: Atom) -> TruthValue:
    """Value of a ``T``/``Know`` atom: the value of the sentence it reifies."""
    reified_sentence(a)
    return evaluate(state.valuation, a)


def know_atom(sentence: Formula, time: str = PRESENT, subject: str = ME) -> Atom:
    if sentence.free_tuple:
        raise KBError(f"{to_text(sentence)} is not a sentence")
    return Atom(KNOW_PRED, (Const(time), Const(subject), mk_abs(sentence)))


_TENSE = {"present": PRESENT, "past": PAST, "future": FUTURE}


def _tense(tag: str) -> str | None:
    norm = tag.replace("-", "_").lower()
    for word, canon in _TENSE.items():
        if norm in (canon.replace("-", "_"), word):
            return word
    return None


def dnknow(state: WorldState, subject: str, time: str, sentence: Formula):
    """The "does not know whether" formula ``p_bot <-> Know(time, subject, <<sentence>>)``.

    Returns the formula, its value (``t`` exactly when the sentence is
    unknown) and an English rendering in the tense of ``time``.
    """
    tense = _tense(time)
    if tense is None:
        subject, time = time, subject
        tense = _tense(time)
    if tense is None:
        raise KBError(f"neither {subject} nor {time} is a time tag")
    k = know_atom(sentence, time, subject)
    f = Equiv(Builtin(BOT), k)
    value = evaluate(state.valuation, f)
    me = subject == ME
    who = "I" if me else subject
    verb = {
        "present": "do not know" if me else "does not know",
        "past": "did not know",
        "future": "will not know",
    }[tense]
    return f, value, f"{who} {verb} whether {to_text(sentence)}"


def known_sentences(state: WorldState) -> list[Formula]:
    out: dict = {}
    for a in sorted(state.valuation.values, key=to_text):
        out[a] = None
    for k in sorted(state.derived_know, key=to_text):
        try:
            out[reified_sentence(k)] = None
        except KBError:
            pass
    for name in sorted(state.paradoxes):
        out[Atom(name, ())] = None
    return list(out)


def truth_concept_ext(state: WorldState, sentences: Iterable[Formula] | None = None) -> MRelation:
    """Extension of the truth concept: each L-concept paired with its known value."""
    I = IntensionalInterpretation(state.domain)
    if sentences is None:
        sentences = known_sentences(state)
    rows = set()
    for s in sentences:
        a = evaluate(state.valuation, s)
        if a is not BOT:
            rows.add((I.concept(s), a))
    return MRelation(2, frozenset(rows))


# --------------------------------------------------------------------------
# persistence
# --------------------------------------------------------------------------

_FACT = re.compile(r"^(?P<atom>.+?)\s*=\s*(?P<value>t|f|top)\s*@\s*(?P<ts>\S+)$")
_PRED = re.compile(r"^(?P<name>[A-Za-z][A-Za-z0-9_]*)/(?P<arity>\d+)(?:\s+sig\s+(?P<sig>\S+))?$")
_NAMED = re.compile(r"^(?P<name>[a-z][A-Za-z0-9_]*)(?:\s*=\s*(?P<value>\w+))?\s*:\s*(?P<body>.+)$")
_RULE = re.compile(r"^(?P<body>.+?)(?:\s*>=\s*(?P<value>t|f|bot|top))?$")
_WEAK = re.compile(r"^(?P<a>\S+)\s+(?P<b>\S+)\s*=\s*(?P<value>t|f|bot|top)$")


def _timestamp(text: str) -> int:
    try:
        return int(text)
    except ValueError:
        pass
    try:
        return int(datetime.fromisoformat(text).timestamp())
    except ValueError:
        raise KBError(f"bad timestamp {text!r}") from None


def dumps(state: WorldState) -> str:
    out = io.StringIO()
    out.write(f"version {FORMAT_VERSION}\n")
    by_kind: dict[str, list[str]] = {}
    for name, kind in state.domain.kinds.items():
        by_kind.setdefault(kind, []).append(name)
    for kind, names in by_kind.items():
        out.write(f"domain {kind} {' '.join(names)}\n")
    for p in state.predicates.values():
        out.write(p.text() + "\n")
    for h in state.valuation.handles.values():
        if h.value is None:
            out.write(f"define {h.name} : {to_text(h.body)}\n")
        elif h.value is TOP:
            out.write(f"paradox {h.name} : {to_text(h.body)}\n")
        else:
            out.write(f"paradox {h.name} = {h.value} : {to_text(h.body)}\n")
    for (a, b), val in state.valuation.weak_eq.items():
        out.write(f"weak_eq {a} {b} = {val}\n")
    for r in state.rules:
        out.write(f"rule {to_text(r.formula)} >= {r.bound}\n")
    for e in state.history:
        out.write(f"fact {to_text(e.atom)} = {e.value} @ {e.timestamp}\n")
    for k in sorted(state.derived_know, key=to_text):
        out.write(f"derived {to_text(k)}\n")
    return out.getvalue()


def persist(state: WorldState, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(dumps(state))


def _parse_at(text: str, lineno: int) -> Formula:
    try:
        return parse(text)
    except ValueError as exc:
        raise KBError(f"line {lineno}: {exc}") from None


class _Loader:
    """Replays knowledge-file lines onto a state."""

    def __init__(self, state: WorldState | None = None):
        self.state = state or new_state()
        self.pending: list[LearnEvent] = []
        self.seen_facts: dict = {}
        self.version_seen = False

    def flush(self):
        if self.pending:
            self.state = step_fk(self.state, self.pending)
            self.pending = []

    def line(self, raw: str, lineno: int):
        text = raw.split("#", 1)[0].strip() if "#" in raw else raw.strip()
        if not text:
            return
        head, _, rest = text.partition(" ")
        rest = rest.strip()
        handler = getattr(self, f"do_{head}", None)
        if handler is None:
            raise KBError(f"line {lineno}: unknown directive {head!r}")
        if head != "fact":
            self.flush()
        try:
            handler(rest, lineno)
        except KBError as exc:
            msg = str(exc)
            raise KBError(msg if msg.startswith("line ") else f"line {lineno}: {msg}") from None
        except ValueError as exc:
            raise KBError(f"line {lineno}: {exc}") from None

    def do_version(self, rest, lineno):
        if rest != str(FORMAT_VERSION):
            raise KBError(f"unsupported knowledge file version {rest!r} (expected {FORMAT_VERSION})")
        self.version_seen = True

    def do_domain(self, rest, lineno):
        kind, *names = rest.split()
        if kind not in (INDIVIDUAL, TIME, NONMEANING) or not names:
            raise KBError("expected: domain <individual|time|nonmeaning> <name>...")
        self.state = declare(self.state, {n: kind for n in names})

    def do_pred(self, rest, lineno):
        m = _PRED.match(rest)
        if not m:
            raise KBError("expected: pred <name>/<arity> [sig <kind>,...]")
        sig = tuple(m["sig"].split(",")) if m["sig"] else None
        self.state = declare(self.state, predicates=[PredicateDecl(m["name"], int(m["arity"]), sig)])

    def _handle(self, rest, lineno, pinned: bool):
        m = _NAMED.match(rest)
        if not m:
            raise KBError("expected: <name> [= <value>] : <formula>")
        body = _parse_at(m["body"], lineno)
        if pinned:
            value = parse_value(m["value"]) if m["value"] else TOP
        elif m["value"]:
            raise KBError("define takes no value")
        else:
            value = None
        self.state = register_sentence(self.state, SentenceHandle(m["name"], body, value))

    def do_paradox(self, rest, lineno):
        self._handle(rest, lineno, pinned=True)

    def do_define(self, rest, lineno):
        self._handle(rest, lineno, pinned=False)

    def do_rule(self, rest, lineno):
        m = _RULE.match(rest)
        f = _parse_at(m["body"], lineno)
        check_formula(self.state, f)
        bound = parse_value(m["value"]) if m["value"] else T
        self.state = replace(self.state, rules=self.state.rules + (Thesis(f, bound),))

    def do_weak_eq(self, rest, lineno):
        m = _WEAK.match(rest)
        if not m:
            raise KBError("expected: weak_eq <term> <term> = <value>")
        table = dict(self.state.valuation.weak_eq)
        table[m["a"], m["b"]] = parse_value(m["value"])
        self.state = replace(self.state, valuation=replace(self.state.valuation, weak_eq=table))

    def do_fact(self, rest, lineno):
        m = _FACT.match(rest)
        if not m:
            raise KBError("expected: fact <atom> = t|f|top @ <timestamp>")
        a = _parse_at(m["atom"], lineno)
        if not isinstance(a, Atom):
            raise KBError(f"{m['atom']} is not an atom")
        _check_learnable(self.state, a)
        ts = _timestamp(m["ts"])
        value = parse_value(m["value"])
        if self.pending and ts != self.pending[0].timestamp:
            if ts < self.pending[0].timestamp:
                raise KBError(f"non-monotone replay: timestamp {ts} after {self.pending[0].timestamp}")
            self.flush()
        if ts <= self.state.timestamp:
            raise KBError(f"non-monotone replay: timestamp {ts} after {self.state.timestamp}")
        for val in ((T, F) if value is TOP else (value,)):
            key = (a, val, ts)
            if key in self.seen_facts:
                raise KBError(
                    f"duplicate fact {to_text(a)} = {val} @ {ts}; first given on line {self.seen_facts[key]}"
                )
            self.seen_facts[key] = lineno
            self.pending.append(LearnEvent(a, val, ts))

    def do_derived(self, rest, lineno):
        a = _parse_at(rest, lineno)
        if not isinstance(a, Atom) or a.pred != KNOW_PRED:
            raise KBError("derived lines must hold a ground Know atom")
        reified_sentence(a)
        check_formula(self.state, a)
        self.state = replace(self.state, derived_know=self.state.derived_know | {a})


def register_sentence(state: WorldState, handle: SentenceHandle) -> WorldState:
    """Add a named built-in sentence; re-registration must repeat the same body."""
    old = state.valuation.handles.get(handle.name)
    if old is not None:
        if old != handle:
            raise KBError(f"sentence {handle.name} is already registered with a different body")
        return state
    if handle.body.free_tuple:
        raise KBError(f"registered sentence {handle.name} must be closed")
    if handle.name in state.predicates:
        raise KBError(f"{handle.name} is already a declared predicate")
    if any(a.pred == handle.name and not a.args for a in state.valuation.values):
        raise KBError(f"{handle.name} already has a learned value")
    v = state.valuation.with_handle(handle)
    return replace(state, valuation=replace(v, base=v.base - {Atom(handle.name, ())}))


def loads(text: str, state: WorldState | None = None) -> WorldState:
    """Replay knowledge-file text onto ``state`` (a fresh state by default)."""
    loader = _Loader(state)
    for lineno, raw in enumerate(text.splitlines(), 1):
        loader.line(raw, lineno)
    loader.flush()
    return loader.state


def restore(path, state: WorldState | None = None) -> WorldState:
    if not os.path.exists(path):
        raise KBError(f"no such knowledge file: {path}")
    with open(path, encoding="utf-8") as fh:
        return loads(fh.read(), state)
