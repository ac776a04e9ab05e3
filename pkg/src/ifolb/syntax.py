"""Abstract syntax, parser and printer for the intensional logic language.

Concrete grammar (whitespace-insensitive)::

    formula  := iff
    iff      := impl ("<->" impl)*            left-associative
    impl     := disj ("->" impl)?             right-associative
    disj     := conj ("|" conj)*
    conj     := unary ("&" unary)*
    unary    := "~" unary | "exists" VAR "." unary | "forall" VAR "." unary | primary
    primary  := atom | "p_t" | "p_f" | "p_bot" | "p_top" | "(" formula ")"
    atom     := NAME "(" term ("," term)* ")" | IDENT
    term     := VAR | IDENT | "<<" formula ">>" ["[" "hide" VAR ("," VAR)* "]"]

``VAR`` starts with an uppercase letter, ``IDENT`` with a lowercase one.  A
predicate name followed by ``(`` may have either case, so ``T(...)`` and
``Know(...)`` are atoms.

Quantifiers are written with a variable name but stored positionally: the
index is the place of the variable in the canonical free-variable tuple of
the body (order of first appearance, left to right).
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Mapping, Union

from .bilattice import TruthValue, parse_value

__all__ = [
    "Var",
    "Const",
    "AbsTerm",
    "Atom",
    "Builtin",
    "Not",
    "Binary",
    "Equiv",
    "Quant",
    "Term",
    "Formula",
    "VirtualPredicate",
    "ParseError",
    "SyntaxFault",
    "free_vars",
    "shared_index_set",
    "mk_abs",
    "apply_assignment",
    "substitute",
    "is_sentence",
    "parse",
    "parse_term",
    "to_text",
    "conj",
    "disj",
    "impl",
    "neg",
    "iff",
    "exists",
    "forall",
    "atom",
    "TRUTH_PRED",
    "KNOW_PRED",
    "ID_PRED",
    "WEAK_EQ_PRED",
    "DISTINGUISHED",
]

TRUTH_PRED = "T"
KNOW_PRED = "Know"
ID_PRED = "id"
WEAK_EQ_PRED = "id_in"
DISTINGUISHED = {TRUTH_PRED: 1, KNOW_PRED: 3, ID_PRED: 2, WEAK_EQ_PRED: 2}


class SyntaxFault(ValueError):
    """A structurally ill-formed AST (bad quantifier position, bad hide set...)."""


class ParseError(SyntaxFault):
    def __init__(self, message: str, line: int, column: int):
        super().__init__(f"{message} at line {line}, column {column}")
        self.line = line
        self.column = column


# --------------------------------------------------------------------------
# AST
# --------------------------------------------------------------------------

class _Node:
    @cached_property
    def free_tuple(self) -> tuple[str, ...]:
        seen: list[str] = []
        for name in self._scan():
            if name not in seen:
                seen.append(name)
        return tuple(seen)

    def _scan(self):  # pragma: no cover - overridden
        raise NotImplementedError

    def __str__(self) -> str:
        return to_text(self)


@dataclass(frozen=True, eq=True)
class Var(_Node):
    name: str

    def _scan(self):
        yield self.name


@dataclass(frozen=True, eq=True)
class Const(_Node):
    name: str

    def _scan(self):
        return iter(())


@dataclass(frozen=True, eq=True)
class AbsTerm(_Node):
    """Reified formula ``<<body>>`` with hidden (compressed) variables.

    ``visible`` lists the remaining free variables of ``body``; only those
    take part in assignments and quantification.
    """

    body: "Formula"
    hidden: tuple[str, ...] = ()
    visible: tuple[str, ...] = ()

    def __post_init__(self):
        fv = self.body.free_tuple
        if set(self.hidden) & set(self.visible):
            raise SyntaxFault("hidden and visible variables overlap")
        if set(self.hidden) | set(self.visible) != set(fv):
            raise SyntaxFault(
                f"hidden {list(self.hidden)} and visible {list(self.visible)} "
                f"do not partition the free variables {list(fv)} of the body"
            )
        if tuple(x for x in fv if x in self.visible) != self.visible:
            raise SyntaxFault("visible variables must follow the body's canonical order")

    def _scan(self):
        return iter(self.visible)


Term = Union[Var, Const, AbsTerm]


@dataclass(frozen=True, eq=True)
class Atom(_Node):
    pred: str
    args: tuple[Term, ...] = ()

    @property
    def arity(self) -> int:
        return len(self.args)

    def _scan(self):
        for a in self.args:
            yield from a.free_tuple


@dataclass(frozen=True, eq=True)
class Builtin(_Node):
    """Built-in propositional letter ``p_a`` whose value is always ``a``."""

    value: TruthValue

    def _scan(self):
        return iter(())


@dataclass(frozen=True, eq=True)
class Not(_Node):
    body: "Formula"

    def _scan(self):
        return iter(self.body.free_tuple)


BINARY_OPS = ("and", "or", "implies")


@dataclass(frozen=True, eq=True)
class Binary(_Node):
    """``left op_S right``; the index set S is derived from shared variables."""

    op: str
    left: "Formula"
    right: "Formula"
    shared: frozenset = field(init=False, compare=False, repr=False)

    def __post_init__(self):
        if self.op not in BINARY_OPS:
            raise SyntaxFault(f"unknown connective {self.op!r}")
        object.__setattr__(self, "shared", shared_index_set(self.left, self.right))

    def _scan(self):
        yield from self.left.free_tuple
        yield from self.right.free_tuple


@dataclass(frozen=True, eq=True)
class Equiv(_Node):
    left: "Formula"
    right: "Formula"

    def _scan(self):
        yield from self.left.free_tuple
        yield from self.right.free_tuple


@dataclass(frozen=True, eq=True)
class Quant(_Node):
    """Positional quantifier over the ``position``-th free variable of ``body``."""

    kind: str
    position: int
    body: "Formula"

    def __post_init__(self):
        if self.kind not in ("exists", "forall"):
            raise SyntaxFault(f"unknown quantifier {self.kind!r}")
        n = len(self.body.free_tuple)
        if not 1 <= self.position <= n:
            raise SyntaxFault(
                f"quantifier position {self.position} outside 1..{n} of the body's free variables"
            )

    @property
    def var(self) -> str:
        return self.body.free_tuple[self.position - 1]

    def _scan(self):
        bound = self.var
        return (x for x in self.body.free_tuple if x != bound)


Formula = Union[Atom, Builtin, Not, Binary, Equiv, Quant]


@dataclass(frozen=True)
class VirtualPredicate:
    """An open formula paired with its canonical free-variable tuple."""

    formula: Formula

    @property
    def free_tuple(self) -> tuple[str, ...]:
        return self.formula.free_tuple

    @property
    def arity(self) -> int:
        return len(self.free_tuple)


# --------------------------------------------------------------------------
# structural operations
# --------------------------------------------------------------------------

def free_vars(node) -> tuple[str, ...]:
    """Canonical free-variable tuple (order of first left-to-right appearance)."""
    return node.free_tuple


def is_sentence(f) -> bool:
    return not f.free_tuple


def shared_index_set(left, right) -> frozenset[tuple[int, int]]:
    """1-based pairs ``(i, j)`` such that ``left[i]`` and ``right[j]`` name the same variable."""
    lt, rt = free_vars(left), free_vars(right)
    return frozenset(
        (i + 1, j + 1) for i, x in enumerate(lt) for j, y in enumerate(rt) if x == y
    )


def mk_abs(body: Formula, hidden: Iterable[str] = ()) -> AbsTerm:
    hidden = set(hidden)
    fv = body.free_tuple
    extra = hidden - set(fv)
    if extra:
        raise SyntaxFault(f"cannot hide {sorted(extra)}: not free in {to_text(body)}")
    return AbsTerm(
        body,
        tuple(x for x in fv if x in hidden),
        tuple(x for x in fv if x not in hidden),
    )


def atom(pred: str, *args) -> Atom:
    """Convenience constructor; string args become Var/Const by their case."""
    terms = []
    for a in args:
        if isinstance(a, str):
            a = Var(a) if a[:1].isupper() else Const(a)
        terms.append(a)
    return Atom(pred, tuple(terms))


def conj(a, b) -> Binary:
    return Binary("and", a, b)


def disj(a, b) -> Binary:
    return Binary("or", a, b)


def impl(a, b) -> Binary:
    return Binary("implies", a, b)


def neg(a) -> Not:
    return Not(a)


def iff(a, b) -> Equiv:
    return Equiv(a, b)


def _quant(kind: str, var: str, body: Formula) -> Quant:
    fv = body.free_tuple
    if var not in fv:
        raise SyntaxFault(f"variable {var} is not free in {to_text(body)}")
    return Quant(kind, fv.index(var) + 1, body)


def exists(var: str, body: Formula) -> Quant:
    return _quant("exists", var, body)


def forall(var: str, body: Formula) -> Quant:
    return _quant("forall", var, body)


def substitute(node, g: Mapping[str, Term]):
    """Replace free (visible) variables named in ``g``; others stay free."""
    if not g or not set(g) & set(node.free_tuple):
        return node
    if isinstance(node, Var):
        return g.get(node.name, node)
    if isinstance(node, Const) or isinstance(node, Builtin):
        return node
    if isinstance(node, AbsTerm):
        inner = {k: v for k, v in g.items() if k in node.visible}
        body = substitute(node.body, inner)
        return AbsTerm(body, node.hidden, tuple(x for x in node.visible if x not in inner))
    if isinstance(node, Atom):
        return Atom(node.pred, tuple(substitute(a, g) for a in node.args))
    if isinstance(node, Not):
        return Not(substitute(node.body, g))
    if isinstance(node, Binary):
        return Binary(node.op, substitute(node.left, g), substitute(node.right, g))
    if isinstance(node, Equiv):
        return Equiv(substitute(node.left, g), substitute(node.right, g))
    if isinstance(node, Quant):
        bound = node.var
        body = substitute(node.body, {k: v for k, v in g.items() if k != bound})
        return Quant(node.kind, body.free_tuple.index(bound) + 1, body)
    raise TypeError(f"not a syntax node: {node!r}")


def apply_assignment(node, g: Mapping[str, object]):
    """Ground ``node`` under ``g`` (variable -> element name or Term).

    Every free visible variable must be bound; hidden variables of abstraction
    terms are never touched.
    """
    missing = [x for x in node.free_tuple if x not in g]
    if missing:
        raise KeyError(f"no binding for free variable(s) {missing}")
    terms = {k: (v if isinstance(v, (Var, Const, AbsTerm)) else Const(str(v))) for k, v in g.items()}
    return substitute(node, terms)


# --------------------------------------------------------------------------
# printer
# --------------------------------------------------------------------------

_PREC = {"iff": 1, "implies": 2, "or": 3, "and": 4}
_UNARY = 5
_SYMBOL = {"and": "&", "or": "|", "implies": "->"}


def _term_text(t: Term, show_sets: bool) -> str:
    if isinstance(t, (Var, Const)):
        return t.name
    if isinstance(t, AbsTerm):
        inner = _fmt(t.body, 0, show_sets)
        if t.hidden:
            return f"<<{inner}>>[hide {', '.join(t.hidden)}]"
        return f"<<{inner}>>"
    raise TypeError(f"not a term: {t!r}")


def _fmt(f, ctx: int, show_sets: bool) -> str:
    if isinstance(f, Atom):
        if not f.args:
            return f.pred
        return f"{f.pred}({', '.join(_term_text(a, show_sets) for a in f.args)})"
    if isinstance(f, Builtin):
        return f"p_{f.value.value}"
    if isinstance(f, Not):
        return "~" + _fmt(f.body, _UNARY, show_sets)
    if isinstance(f, Quant):
        text = f"{f.kind} {f.var}. {_fmt(f.body, _UNARY, show_sets)}"
        return text
    if isinstance(f, (Binary, Equiv)):
        op = "iff" if isinstance(f, Equiv) else f.op
        p = _PREC[op]
        if op == "implies":
            lhs, rhs = _fmt(f.left, p + 1, show_sets), _fmt(f.right, p, show_sets)
        else:
            lhs, rhs = _fmt(f.left, p, show_sets), _fmt(f.right, p + 1, show_sets)
        sym = "<->" if op == "iff" else _SYMBOL[op]
        if show_sets and isinstance(f, Binary):
            pairs = ",".join(f"({i},{j})" for i, j in sorted(f.shared))
            sym = f"{sym}{{{pairs}}}"
        text = f"{lhs} {sym} {rhs}"
        return f"({text})" if p < ctx else text
    if isinstance(f, (Var, Const, AbsTerm)):
        return _term_text(f, show_sets)
    raise TypeError(f"not a formula: {f!r}")


def to_text(f, show_sets: bool = False) -> str:
    """Canonical text of a formula or term.

    With ``show_sets`` the derived index sets are shown after binary
    connectives; that form is for debugging and does not parse back.
    """
    return _fmt(f, 0, show_sets)


# --------------------------------------------------------------------------
# parser
# --------------------------------------------------------------------------

_TOKEN = re.compile(
    r"""
    (?P<ws>\s+)
  | (?P<sym><->|<<|>>|->|[()\[\],.~&|])
  | (?P<name>[A-Za-z][A-Za-z0-9_]*(?:-[A-Za-z0-9_]+)*)
    """,
    re.VERBOSE,
)
_KEYWORDS = {"exists", "forall", "hide"}
_BUILTINS = {"p_t", "p_f", "p_bot", "p_top"}


@dataclass
class _Tok:
    kind: str  # "sym", "name", "eof"
    text: str
    line: int
    col: int


def _tokenize(text: str) -> list[_Tok]:
    toks: list[_Tok] = []
    pos, line, line_start = 0, 1, 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m is None:
            raise ParseError(f"unexpected character {text[pos]!r}", line, pos - line_start + 1)
        kind = m.lastgroup
        if kind == "ws":
            chunk = m.group()
            nl = chunk.count("\n")
            if nl:
                line += nl
                line_start = pos + chunk.rindex("\n") + 1
        else:
            toks.append(_Tok(kind, m.group(), line, pos - line_start + 1))
        pos = m.end()
    toks.append(_Tok("eof", "", line, pos - line_start + 1))
    return toks


class _Parser:
    def __init__(self, text: str):
        self.toks = _tokenize(text)
        self.i = 0

    @property
    def cur(self) -> _Tok:
        return self.toks[self.i]

    def error(self, msg: str, tok: _Tok | None = None):
        tok = tok or self.cur
        return ParseError(msg, tok.line, tok.col)

    def at(self, text: str) -> bool:
        return self.cur.kind != "eof" and self.cur.text == text

    def take(self, text: str | None = None) -> _Tok:
        tok = self.cur
        if text is not None and tok.text != text:
            found = "end of input" if tok.kind == "eof" else repr(tok.text)
            raise self.error(f"expected {text!r}, found {found}")
        self.i += 1
        return tok

    def expect_end(self):
        if self.cur.kind != "eof":
            raise self.error(f"unexpected {self.cur.text!r}")

    # formula levels -------------------------------------------------------

    def formula(self) -> Formula:
        left = self.implication()
        while self.at("<->"):
            self.take()
            left = Equiv(left, self.implication())
        return left

    def implication(self) -> Formula:
        left = self.disjunction()
        if self.at("->"):
            self.take()
            return Binary("implies", left, self.implication())
        return left

    def disjunction(self) -> Formula:
        left = self.conjunction()
        while self.at("|"):
            self.take()
            left = Binary("or", left, self.conjunction())
        return left

    def conjunction(self) -> Formula:
        left = self.unary()
        while self.at("&"):
            self.take()
            left = Binary("and", left, self.unary())
        return left

    def unary(self) -> Formula:
        if self.at("~"):
            self.take()
            return Not(self.unary())
        if self.cur.kind == "name" and self.cur.text in ("exists", "forall"):
            kind = self.take().text
            vtok = self.cur
            if vtok.kind != "name" or not vtok.text[0].isupper():
                raise self.error("expected a variable after quantifier")
            self.take()
            self.take(".")
            body = self.unary()
            fv = body.free_tuple
            if vtok.text not in fv:
                raise self.error(f"quantified variable {vtok.text} is not free in its body", vtok)
            return Quant(kind, fv.index(vtok.text) + 1, body)
        return self.primary()

    def primary(self) -> Formula:
        tok = self.cur
        if self.at("("):
            self.take()
            f = self.formula()
            self.take(")")
            return f
        if tok.kind != "name":
            found = "end of input" if tok.kind == "eof" else repr(tok.text)
            raise self.error(f"expected a formula, found {found}")
        if tok.text in _BUILTINS:
            self.take()
            return Builtin(parse_value(tok.text[2:]))
        if tok.text in _KEYWORDS:
            raise self.error(f"unexpected keyword {tok.text!r}")
        self.take()
        if self.at("("):
            self.take()
            args = [self.term()]
            while self.at(","):
                self.take()
                args.append(self.term())
            self.take(")")
            return Atom(tok.text, tuple(args))
        if tok.text[0].isupper():
            raise self.error(f"variable {tok.text} used where a formula is expected", tok)
        return Atom(tok.text, ())

    def term(self) -> Term:
        tok = self.cur
        if self.at("<<"):
            self.take()
            body = self.formula()
            self.take(">>")
            hidden: list[str] = []
            if self.at("["):
                self.take()
                self.take("hide")
                while True:
                    vt = self.cur
                    if vt.kind != "name" or not vt.text[0].isupper():
                        raise self.error("expected a variable in hide list")
                    self.take()
                    if vt.text in hidden:
                        raise self.error(f"variable {vt.text} hidden twice", vt)
                    if vt.text not in body.free_tuple:
                        raise self.error(f"hidden variable {vt.text} is not free in the body", vt)
                    hidden.append(vt.text)
                    if not self.at(","):
                        break
                    self.take()
                self.take("]")
            return mk_abs(body, hidden)
        if tok.kind != "name" or tok.text in _KEYWORDS or tok.text in _BUILTINS:
            found = "end of input" if tok.kind == "eof" else repr(tok.text)
            raise self.error(f"expected a term, found {found}")
        self.take()
        if self.at("("):
            raise self.error("function terms are not supported; use a predicate for the graph")
        if tok.text[0].isupper():
            return Var(tok.text)
        return Const(tok.text)


def parse(text: str) -> Formula:
    p = _Parser(text)
    f = p.formula()
    p.expect_end()
    return f


def parse_term(text: str) -> Term:
    p = _Parser(text)
    t = p.term()
    p.expect_end()
    return t
