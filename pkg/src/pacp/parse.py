"""Concrete syntax: lexer, recursive-descent parser, canonical printer.

Grammar, loosest to tightest:

    term   :=  chunk ('+' chunk)*
    chunk  :=  seqs (midop seqs)*      midop in { '||', '||_', '|', '+[p]' },
                                       one kind per chain; mixing needs parens
    seqs   :=  atom ('.' atom)*
    atom   :=  action | '~' action | 'delta' | '(' term ')'
            |  'encap' '(' '{' actions '}' ',' term ')'
            |  '<' Var '|' specname '>'
            |  'si' '[' strategy ']' tail
            |  'posm' '[' strategy ',' index ']' tail
    tail   :=  ('{' histpairs ';' state '}')? '(' term (',' term)* ')'

Same-kind binary chains associate to the right; `a + b + c` parses as
`a + (b + c)`. An action is an identifier, optionally with a one-identifier
argument (`P(r)`, `cr(d)`); `~` marks the barred copy. The si/posm brace
block carries an explicit interleaving history `(i,n)(j,m)...` and a
control state in the owning strategy's own notation; without it the
history is empty and the state initial.

`print_term` emits minimal parentheses and round-trips: parsing its output
yields a structurally identical term.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

from .meadow import Rat
from .terms import (Action, Act, Alt, CMerge, DELTA, Deadlock, Encap,
                    Interleave, LMerge, PChoice, Par, PLAIN, Rec, RecSpec,
                    Scheduled, Seq, Term, Var, hist_ok, plain)
from . import strategy as _strategy

KEYWORDS = {"delta", "encap", "si", "posm", "spec"}


class ParseError(ValueError):
    def __init__(self, msg: str, pos: int | None = None):
        self.pos = pos
        super().__init__(msg if pos is None else f"{msg} (at offset {pos})")


# ------------------------------------------------------------------ lexer

@dataclass
class Tok:
    kind: str
    text: str
    pos: int


_MULTI = ("||_", "||", "->", "+[")
_SINGLE = "(){}[]<>,;:.|+*/=~-"
_IDENT = re.compile(r"[A-Za-z_][A-Za-z0-9_]*")
_NUM = re.compile(r"[0-9]+")


def lex(src: str) -> list:
    toks = []
    i, n = 0, len(src)
    while i < n:
        c = src[i]
        if c in " \t\r\n":
            i += 1
            continue
        if c == "#":
            while i < n and src[i] != "\n":
                i += 1
            continue
        matched = False
        for op in _MULTI:
            if src.startswith(op, i):
                toks.append(Tok(op, op, i))
                i += len(op)
                matched = True
                break
        if matched:
            continue
        m = _IDENT.match(src, i)
        if m:
            toks.append(Tok("ident", m.group(), i))
            i = m.end()
            continue
        m = _NUM.match(src, i)
        if m:
            toks.append(Tok("num", m.group(), i))
            i = m.end()
            continue
        if c in _SINGLE:
            toks.append(Tok(c, c, i))
            i += 1
            continue
        raise ParseError(f"unexpected character {c!r}", i)
    toks.append(Tok("eof", "", n))
    return toks


# ------------------------------------------------------- parsing context

class OpenContext:
    """Fallback context: open alphabet of bare identifiers, globally
    registered strategies, no specs, no declared control or creation."""

    def resolve_action(self, head, arg, barred, pos=None):
        if barred or arg is not None:
            raise ParseError(
                f"action {'~' if barred else ''}{head}"
                f"{'(' + arg + ')' if arg else ''} needs a configuration "
                "declaring it", pos)
        return plain(head)

    def strategy_named(self, name):
        return _strategy.get_strategy(name)

    def spec_named(self, name):
        raise ParseError(f"unknown specification {name!r}")

    def creation_body(self, datum):
        raise ParseError(f"no creation body configured for {datum!r}")


_OPEN = OpenContext()


# ----------------------------------------------------------------- parser

class _Parser:
    def __init__(self, src: str, ctx, variables=frozenset()):
        self.src = src
        self.toks = lex(src)
        self.i = 0
        self.ctx = ctx if ctx is not None else _OPEN
        self.vars = variables

    def peek(self) -> Tok:
        return self.toks[self.i]

    def next(self) -> Tok:
        t = self.toks[self.i]
        self.i += 1
        return t

    def at(self, kind: str) -> bool:
        return self.toks[self.i].kind == kind

    def expect(self, kind: str) -> Tok:
        t = self.toks[self.i]
        if t.kind != kind:
            raise ParseError(f"expected {kind!r}, found {t.text!r}", t.pos)
        self.i += 1
        return t

    # term := chunk ('+' chunk)*
    def term(self) -> Term:
        parts = [self.chunk()]
        while self.at("+"):
            self.next()
            parts.append(self.chunk())
        out = parts[-1]
        for p in reversed(parts[:-1]):
            out = Alt(p, out)
        return out

    # chunk := seqs (midop seqs)*, one midop kind per chain
    def chunk(self) -> Term:
        first = self.seqs()
        kind = None
        items = [first]
        probs = []
        while self.peek().kind in ("||", "||_", "|", "+["):
            t = self.peek()
            if kind is None:
                kind = t.kind
            elif kind != t.kind:
                raise ParseError(
                    f"operators {kind!r} and {t.kind!r} bind equally "
                    "strongly; parenthesize", t.pos)
            self.next()
            if t.kind == "+[":
                probs.append(self._prob_tail(t.pos))
            items.append(self.seqs())
        if kind is None:
            return first
        out = items[-1]
        for idx in range(len(items) - 2, -1, -1):
            if kind == "||":
                out = Par(items[idx], out)
            elif kind == "||_":
                out = LMerge(items[idx], out)
            elif kind == "|":
                out = CMerge(items[idx], out)
            else:
                out = PChoice(probs[idx], items[idx], out)
        return out

    def _prob_tail(self, pos: int) -> Rat:
        num = int(self.expect("num").text)
        den = 1
        if self.at("/"):
            self.next()
            den = int(self.expect("num").text)
        self.expect("]")
        if den == 0:
            raise ParseError("probability with denominator 0", pos)
        p = Rat(num, den)
        if not p.is_prob():
            raise ParseError(f"probability {p} outside [0, 1]", pos)
        return p

    # seqs := atom ('.' atom)*
    def seqs(self) -> Term:
        parts = [self.atom()]
        while self.at("."):
            self.next()
            parts.append(self.atom())
        out = parts[-1]
        for p in reversed(parts[:-1]):
            out = Seq(p, out)
        return out

    def atom(self) -> Term:
        t = self.peek()
        if t.kind == "(":
            self.next()
            inner = self.term()
            self.expect(")")
            return inner
        if t.kind == "~":
            self.next()
            head = self.expect("ident")
            arg = None
            if self.at("("):
                self.next()
                arg = self.expect("ident").text
                self.expect(")")
            return Act(self.ctx.resolve_action(head.text, arg, True, head.pos))
        if t.kind == "<":
            self.next()
            var = self.expect("ident").text
            self.expect("|")
            name = self.expect("ident").text
            close = self.expect(">")
            spec = self.ctx.spec_named(name)
            try:
                spec.rhs(var)
            except KeyError:
                raise ParseError(
                    f"specification {name!r} defines no {var!r}", close.pos)
            return Rec(var, spec)
        if t.kind == "ident":
            if t.text == "delta":
                self.next()
                return DELTA
            if t.text == "encap":
                return self._encap()
            if t.text == "si":
                return self._interleave()
            if t.text == "posm":
                return self._scheduled()
            self.next()
            if t.text in self.vars:
                return Var(t.text)
            arg = None
            if self.at("("):
                self.next()
                arg = self.expect("ident").text
                self.expect(")")
            return Act(self.ctx.resolve_action(t.text, arg, False, t.pos))
        raise ParseError(f"expected a term, found {t.text!r}", t.pos)

    def _encap(self) -> Term:
        self.expect("ident")  # 'encap'
        self.expect("(")
        self.expect("{")
        blocked = set()
        while not self.at("}"):
            t = self.expect("ident")
            arg = None
            if self.at("("):
                self.next()
                arg = self.expect("ident").text
                self.expect(")")
            a = self.ctx.resolve_action(t.text, arg, False, t.pos)
            if a.kind != PLAIN:
                raise ParseError(
                    f"only plain actions can be encapsulated, not {a}", t.pos)
            blocked.add(a)
            if self.at(","):
                self.next()
        self.expect("}")
        self.expect(",")
        body = self.term()
        self.expect(")")
        return Encap(frozenset(blocked), body)

    def _strategy_header(self):
        self.expect("[")
        name_tok = self.expect("ident")
        try:
            strat = self.ctx.strategy_named(name_tok.text)
        except ValueError as e:
            raise ParseError(str(e), name_tok.pos) from None
        return name_tok.text, strat, name_tok.pos

    def _si_tail(self, strat):
        """Optional '{hist; state}' then '(' terms ')'; returns (h, s, procs)."""
        hist = ()
        state = None
        if self.at("{"):
            self.next()
            pairs = []
            while self.at("("):
                self.next()
                i = int(self.expect("num").text)
                self.expect(",")
                n = int(self.expect("num").text)
                self.expect(")")
                pairs.append((i, n))
            self.expect(";")
            # the control state is strategy-owned notation: hand the raw
            # text up to the closing brace to the strategy's codec
            start = self.peek().pos
            depth = 0
            j = self.i
            while self.toks[j].kind != "}" and self.toks[j].kind != "eof":
                j += 1
            if self.toks[j].kind == "eof":
                raise ParseError("unterminated control state", start)
            raw = self.src[start:self.toks[j].pos]
            try:
                state = strat.state_parse(raw)
            except ValueError as e:
                raise ParseError(str(e), start) from None
            self.i = j + 1
            hist = tuple(pairs)
        self.expect("(")
        procs = [self.term()]
        while self.at(","):
            self.next()
            procs.append(self.term())
        close = self.expect(")")
        if state is None:
            state = strat.initial_state()
        if not hist_ok(hist, len(procs)):
            raise ParseError(
                f"history {hist} invalid for {len(procs)} processes",
                close.pos)
        return hist, state, tuple(procs)

    def _interleave(self) -> Term:
        self.expect("ident")  # 'si'
        name, strat, _ = self._strategy_header()
        self.expect("]")
        h, s, procs = self._si_tail(strat)
        return Interleave(name, h, s, procs)

    def _scheduled(self) -> Term:
        self.expect("ident")  # 'posm'
        name, strat, _ = self._strategy_header()
        self.expect(",")
        pos_tok = self.expect("num")
        self.expect("]")
        h, s, procs = self._si_tail(strat)
        i = int(pos_tok.text)
        if not 1 <= i <= len(procs):
            raise ParseError(
                f"position {i} out of 1..{len(procs)}", pos_tok.pos)
        return Scheduled(name, i, h, s, procs)


def parse_term(text: str, ctx=None, variables=frozenset()) -> Term:
    p = _Parser(text, ctx, variables)
    out = p.term()
    trailing = p.peek()
    if trailing.kind != "eof":
        raise ParseError(f"trailing input {trailing.text!r}", trailing.pos)
    return out


def parse_spec(text: str, ctx=None) -> RecSpec:
    """Parse 'spec name { X = term; ... }'. Variables may be referenced
    forward; every right-hand side may use all of the spec's variables."""
    p = _Parser(text, ctx)
    kw = p.expect("ident")
    if kw.text != "spec":
        raise ParseError("expected 'spec'", kw.pos)
    name = p.expect("ident").text
    p.expect("{")
    # first pass over the token stream: collect the defined variables
    variables = set()
    j = p.i
    expecting_head = True
    depth = 1
    while depth > 0:
        tok = p.toks[j]
        if tok.kind == "eof":
            raise ParseError("unterminated spec block", tok.pos)
        if tok.kind == "{":
            depth += 1
        elif tok.kind == "}":
            depth -= 1
        elif depth == 1 and expecting_head and tok.kind == "ident" \
                and p.toks[j + 1].kind == "=":
            variables.add(tok.text)
            expecting_head = False
        elif depth == 1 and tok.kind == ";":
            expecting_head = True
        j += 1
    p.vars = frozenset(variables)
    equations = []
    while not p.at("}"):
        var = p.expect("ident").text
        p.expect("=")
        rhs = p.term()
        p.expect(";")
        equations.append((var, rhs))
    p.expect("}")
    p.expect("eof")
    return RecSpec(name, tuple(equations))


def parse_term_file(text: str, ctx=None) -> list:
    """Term files: one term or 'name = term' binding per line; '#' comments.
    Returns a list of (name-or-None, term) in file order."""
    out = []
    for lineno, line in enumerate(text.splitlines(), 1):
        body = line.split("#", 1)[0].strip()
        if not body:
            continue
        name = None
        m = re.match(r"([A-Za-z_][A-Za-z0-9_]*)\s*=\s*(.*)$", body)
        if m and m.group(1) not in KEYWORDS:
            name, body = m.group(1), m.group(2)
        try:
            out.append((name, parse_term(body, ctx)))
        except ParseError as e:
            raise ParseError(f"line {lineno}: {e.args[0]}") from None
    return out


# ---------------------------------------------------------------- printer

_ALT, _MID, _SEQ, _ATOM = 0, 1, 2, 3


def _strategy_for_print(name, ctx):
    if ctx is not None:
        return ctx.strategy_named(name)
    return _strategy.get_strategy(name)


def _mid_tag(t: Term):
    if isinstance(t, Par):
        return "||"
    if isinstance(t, LMerge):
        return "||_"
    if isinstance(t, CMerge):
        return "|"
    if isinstance(t, PChoice):
        return "+["
    return None


def _pp(t: Term, ctx) -> tuple:
    """Returns (text, level)."""
    if isinstance(t, Act):
        return str(t.action), _ATOM
    if isinstance(t, Deadlock):
        return "delta", _ATOM
    if isinstance(t, Var):
        return t.name, _ATOM
    if isinstance(t, Rec):
        return f"<{t.var}|{t.spec.name}>", _ATOM
    if isinstance(t, Alt):
        lt, ll = _pp(t.left, ctx)
        rt, _rl = _pp(t.right, ctx)
        if ll == _ALT:
            lt = f"({lt})"
        return f"{lt} + {rt}", _ALT
    if isinstance(t, Seq):
        lt, ll = _pp(t.left, ctx)
        rt, rl = _pp(t.right, ctx)
        if ll <= _SEQ:
            lt = f"({lt})"
        if rl < _SEQ:
            rt = f"({rt})"
        return f"{lt} . {rt}", _SEQ
    tag = _mid_tag(t)
    if tag is not None:
        lt, ll = _pp(t.left, ctx)
        rt, rl = _pp(t.right, ctx)
        if ll <= _MID:
            lt = f"({lt})"
        if rl == _ALT or (rl == _MID and _mid_tag(t.right) != tag):
            rt = f"({rt})"
        op = f"+[{t.prob}]" if isinstance(t, PChoice) else tag
        return f"{lt} {op} {rt}", _MID
    if isinstance(t, Encap):
        acts = ", ".join(str(a) for a in
                         sorted(t.blocked, key=lambda a: a.sort_key()))
        body, _ = _pp(t.body, ctx)
        return f"encap({{{acts}}}, {body})", _ATOM
    if isinstance(t, (Interleave, Scheduled)):
        strat = _strategy_for_print(t.strategy, ctx)
        if isinstance(t, Interleave):
            head = f"si[{t.strategy}]"
        else:
            head = f"posm[{t.strategy}, {t.pos}]"
        mid = ""
        if t.hist or t.state != strat.initial_state():
            pairs = "".join(f"({i},{n})" for (i, n) in t.hist)
            mid = f"{{{pairs}; {strat.state_str(t.state)}}}"
        args = ", ".join(_pp(p, ctx)[0] for p in t.procs)
        return f"{head}{mid}({args})", _ATOM
    raise TypeError(f"not a term: {t!r}")


def print_term(t: Term, ctx=None) -> str:
    return _pp(t, ctx)[0]
