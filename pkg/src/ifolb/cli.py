"""Command shell for the robot's knowledge base.

Each input line is one command (``#`` starts a comment).  Besides the
commands listed by ``help``, every knowledge-file directive (``domain``,
``pred``, ``fact``, ``rule``, ...) is accepted, so a knowledge file is also
a valid script.
"""

from __future__ import annotations

import argparse
import re
import sys
from dataclasses import dataclass, field, replace
from typing import TextIO

from .bilattice import F, T, TOP, parse_value
from .deduction import (
    DEFAULT_CAP,
    DeductionError,
    Sequent,
    Thesis,
    ThesisSet,
    entails,
    forward_chain,
    sequent_valid,
)
from .knowledge import (
    ME,
    PRESENT,
    KBError,
    LearnEvent,
    WorldState,
    _Loader,
    _timestamp,
    check_formula,
    dnknow,
    is_saturated,
    know_atom,
    persist,
    restore,
    step_fk,
)
from .semantics import EvaluationError, evaluate, extension
from .syntax import Atom, SyntaxFault, VirtualPredicate, parse, to_text

HELP = """\
commands:
  load <file>                   replay a knowledge file onto the current state
  learn <atom>=<t|f|top> [@ts]  learn evidence (default time tag: current + 1)
  query <formula>               value of a sentence, or the table of an open formula
  entail <phi> [>= v] ; ... |= <psi>
                                model-based entailment (bounds default to t)
  sequent <phi> ; ... |- <psi>  sequent validity
  know <sentence>               value of Know(in-present, me, <<sentence>>)
  dunno <sentence> [by <subject>] [at <time>]
                                "does not know whether" check and phrase
  derive [fuel]                 forward chaining; adds the derived Know atoms
  history                       learned events in order
  fixpoint                      whether no declared atom is still unknown
  dump <file>                   write the state as a knowledge file
  trace on|off                  print derivation steps
  help                          this text
  quit                          leave
knowledge-file directives (domain, pred, fact, rule, paradox, define,
weak_eq, derived, version) are accepted as commands."""

DIRECTIVES = ("version", "domain", "pred", "fact", "rule", "paradox", "define", "weak_eq", "derived")
COMMANDS = (
    "load", "learn", "query", "entail", "sequent", "know", "dunno", "derive",
    "history", "fixpoint", "dump", "trace", "help", "quit", "exit",
)

_LEARN = re.compile(r"^(?P<atom>.+?)\s*=\s*(?P<value>t|f|top)\s*(?:@\s*(?P<ts>\S+))?$")
_DUNNO = re.compile(r"^(?P<body>.+?)(?:\s+by\s+(?P<subject>\S+))?(?:\s+at\s+(?P<time>\S+))?$")
_BOUND = re.compile(r"^(?P<body>.+?)\s*>=\s*(?P<value>t|f|bot|top)$")


class CommandError(ValueError):
    pass


class Quit(Exception):
    pass


@dataclass(frozen=True)
class Command:
    name: str
    arg: str = ""


def parse_command(line: str) -> Command | None:
    text = line.split("#", 1)[0].strip() if "#" in line else line.strip()
    if not text:
        return None
    name, _, rest = text.partition(" ")
    if name not in COMMANDS and name not in DIRECTIVES:
        raise CommandError(f"unknown command {name!r} (try help)")
    return Command(name, rest.strip())


@dataclass
class Session:
    cap: int = DEFAULT_CAP
    sample: bool = False
    seed: int = 0
    trace: bool = False
    loader: _Loader = field(default_factory=_Loader)

    @property
    def state(self) -> WorldState:
        self.loader.flush()
        return self.loader.state

    @state.setter
    def state(self, value: WorldState):
        self.loader.flush()
        self.loader.state = value

    def execute(self, line: str, lineno: int = 1) -> str:
        """Run one line; returns the output.  Failed commands leave the state unchanged."""
        cmd = parse_command(line)
        if cmd is None:
            return ""
        if cmd.name in DIRECTIVES:
            before = self.loader.state
            try:
                self.loader.line(f"{cmd.name} {cmd.arg}", lineno)
            except Exception:
                self.loader.state, self.loader.pending = before, []
                raise
            return ""
        before = self.state
        try:
            return getattr(self, f"cmd_{cmd.name}")(cmd.arg)
        except Exception:
            self.state = before
            raise

    # -- commands ----------------------------------------------------------

    def cmd_help(self, arg):
        return HELP

    def cmd_quit(self, arg):
        raise Quit

    cmd_exit = cmd_quit

    def cmd_load(self, arg):
        if not arg:
            raise CommandError("usage: load <file>")
        self.state = restore(arg, self.state)
        return f"loaded {arg}"

    def cmd_dump(self, arg):
        if not arg:
            raise CommandError("usage: dump <file>")
        persist(self.state, arg)
        return f"wrote {arg}"

    def cmd_learn(self, arg):
        m = _LEARN.match(arg)
        if not m:
            raise CommandError("usage: learn <atom>=<t|f|top> [@timestamp]")
        a = parse(m["atom"])
        if not isinstance(a, Atom):
            raise CommandError(f"{m['atom']} is not an atom")
        state = self.state
        ts = _timestamp(m["ts"]) if m["ts"] else state.timestamp + 1
        value = parse_value(m["value"])
        evs = [LearnEvent(a, x, ts) for x in ((T, F) if value is TOP else (value,))]
        self.state = step_fk(state, evs)
        return f"{to_text(a)} = {self.state.value(a)} @ {ts}"

    def _formula(self, text):
        f = parse(text)
        check_formula(self.state, f)
        return f

    def cmd_query(self, arg):
        f = self._formula(arg)
        v = self.state.valuation
        if not f.free_tuple:
            return str(evaluate(v, f))
        R = extension(v, VirtualPredicate(f))
        header = ", ".join(f.free_tuple) + " -> value"
        rows = [", ".join(str(x) for x in row[:-1]) + f" -> {row[-1]}" for row in R]
        if not rows:
            rows = ["(no known tuples: every instance is bot)"]
        return "\n".join([header] + rows)

    def _sentences(self, text):
        return [self._formula(p) for p in text.split(";") if p.strip()]

    def cmd_entail(self, arg):
        if "|=" not in arg:
            raise CommandError("usage: entail <phi> [>= v] ; ... |= <psi>")
        lhs, rhs = arg.split("|=", 1)
        theses = []
        for part in lhs.split(";"):
            part = part.strip()
            if not part:
                continue
            m = _BOUND.match(part)
            body, bound = (m["body"], parse_value(m["value"])) if m else (part, T)
            theses.append(Thesis(self._formula(body), bound))
        verdict = entails(
            ThesisSet(tuple(theses)), self._formula(rhs.strip()), template=self.state,
            cap=self.cap, sample=self.sample, seed=self.seed,
        )
        return verdict.describe()

    def cmd_sequent(self, arg):
        if "|-" not in arg:
            raise CommandError("usage: sequent <phi> ; ... |- <psi>")
        lhs, rhs = arg.split("|-", 1)
        s = Sequent(tuple(self._sentences(lhs)), self._formula(rhs.strip()))
        verdict = sequent_valid(s, template=self.state, cap=self.cap, sample=self.sample, seed=self.seed)
        return verdict.describe()

    def cmd_know(self, arg):
        f = self._formula(arg)
        return str(evaluate(self.state.valuation, know_atom(f, PRESENT, ME)))

    def cmd_dunno(self, arg):
        m = _DUNNO.match(arg)
        f = self._formula(m["body"])
        _, value, phrase = dnknow(self.state, m["subject"] or ME, m["time"] or PRESENT, f)
        return f"{value}: {phrase}"

    def cmd_derive(self, arg):
        fuel = int(arg) if arg else 1000
        state = self.state
        missing = [c for c in (PRESENT, ME) if c not in state.domain.kinds]
        if missing:
            raise CommandError(f"derive needs declared constants: {', '.join(missing)}")
        know, deriv = forward_chain(state, fuel)
        self.state = replace(state, derived_know=state.derived_know | know)
        out = [f"derived {len(know)} Know atom(s), {len(deriv.conclusions)} conclusion(s) by axiom T"]
        if self.trace:
            out.extend(deriv.lines())
        elif deriv.exhausted:
            out.append("fuel exhausted before the closure was reached")
        return "\n".join(out)

    def cmd_history(self, arg):
        h = self.state.history
        if not h:
            return "(no events)"
        return "\n".join(f"@{e.timestamp}: {to_text(e.atom)} = {e.value}" for e in h)

    def cmd_fixpoint(self, arg):
        ok, unknown = is_saturated(self.state)
        return "yes" if ok else f"no — {len(unknown)} unknown atoms remain"

    def cmd_trace(self, arg):
        if arg not in ("on", "off"):
            raise CommandError("usage: trace on|off")
        self.trace = arg == "on"
        return f"trace {arg}"


ERRORS = (CommandError, KBError, DeductionError, EvaluationError, SyntaxFault, ValueError, OSError)


def run_script(session: Session, lines, out: TextIO, err: TextIO, name="<script>") -> int:
    for lineno, line in enumerate(lines, 1):
        try:
            text = session.execute(line, lineno)
        except Quit:
            return 0
        except ERRORS as exc:
            msg = str(exc)
            where = name if msg.startswith("line ") else f"{name}: line {lineno}"
            err.write(f"{where}: error: {msg}\n")
            return 1
        if text:
            out.write(text + "\n")
    try:
        session.state
    except ERRORS as exc:
        err.write(f"{name}: error: {exc}\n")
        return 1
    return 0


def repl(session: Session, out: TextIO, err: TextIO) -> int:
    out.write("ifolb knowledge shell; type help for commands, quit to leave\n")
    while True:
        try:
            line = input("> ")
        except EOFError:
            out.write("\n")
            return 0
        try:
            text = session.execute(line)
        except Quit:
            return 0
        except ERRORS as exc:
            err.write(f"error: {exc}\n")
            continue
        if text:
            out.write(text + "\n")


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="ifolb", description="Four-valued knowledge base shell.")
    p.add_argument("--batch", metavar="FILE", help="run commands from FILE and exit")
    p.add_argument("--kb", metavar="FILE", help="preload a knowledge file")
    p.add_argument("--cap", type=int, default=DEFAULT_CAP, help="enumeration cap on the Herbrand base")
    p.add_argument("--sample", action="store_true", help="sample valuations when the cap is exceeded")
    p.add_argument("--seed", type=int, default=0, help="seed for sampling")
    return p


def run(args=None, out: TextIO | None = None, err: TextIO | None = None) -> int:
    out = out or sys.stdout
    err = err or sys.stderr
    try:
        ns = build_parser().parse_args(args)
    except SystemExit as exc:
        return 2 if exc.code else 0
    session = Session(cap=ns.cap, sample=ns.sample, seed=ns.seed)
    if ns.kb:
        try:
            session.state = restore(ns.kb, session.state)
        except ERRORS as exc:
            err.write(f"error: {exc}\n")
            return 1
    if ns.batch:
        try:
            with open(ns.batch, encoding="utf-8") as fh:
                lines = fh.read().splitlines()
        except OSError as exc:
            err.write(f"error: {exc}\n")
            return 1
        return run_script(session, lines, out, err, ns.batch)
    return repl(session, out, err)


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
