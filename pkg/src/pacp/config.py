"""Workbench configuration: alphabet, communication, strategies, creation.

A Config owns everything term parsing and the semantics need to resolve
names: the plain-action alphabet (closed once declared, open by default),
the communication table, declared control actions, the process-creation
data and bodies, locally declared strategies, and named recursive
specifications. The config file format is line-oriented with `#`
comments; curly braces may span physical lines:

    actions  = { a, b, send, recv }
    comm     = { send * recv -> talk }
    control  = { go }
    data     = { d }
    create cr(d) = a . b
    strategy rr  = cyclic
    strategy lot = uniform
    strategy sem = semaphore(k=2, semaphores={r1, r2})

Control actions P(r)/V(r) come from semaphore strategies; `control`
declares extra bare ones. The barred copies of all control actions and
the creation actions cr(d)/~cr(d) are reserved alphabet members with
forced communication behavior; validate_comm checks the whole table.
"""

from __future__ import annotations

import re

from .terms import (Action, BARRED, CONTROL, CREATE, CREATED, PLAIN,
                    RecSpec, Term, control, create, created, free_vars,
                    plain, spec_guarded)
from .parse import (KEYWORDS, ParseError, parse_spec, parse_term,
                    parse_term_file)
from . import strategy as _strategy

_RESERVED_HEADS = KEYWORDS | {"cr"}


class ConfigError(ValueError):
    pass


class Config:
    def __init__(self):
        self.plain_names = None          # None: open alphabet
        self.comm = {}                   # frozenset{a, b} -> Action
        self.control_bare = set()        # bare control action names
        self.data = frozenset()          # creation data
        self.creation = {}               # datum -> closed Term
        self.strategies = {}             # local name -> Strategy
        self.specs = {}                  # name -> RecSpec

    # -- derived sets --

    def control_set(self) -> frozenset:
        out = {control(name) for name in self.control_bare}
        for strat in self.strategies.values():
            out |= strat.control_actions()
        return frozenset(out)

    def alphabet(self) -> frozenset:
        """All actions known to this config (plain, control and barred
        copies, creation requests and acknowledgements). With an open
        alphabet only the explicitly mentioned plain actions appear."""
        out = set()
        if self.plain_names:
            out |= {plain(n) for n in self.plain_names}
        for key, val in self.comm.items():
            out |= set(key)
            out.add(val)
        ctrl = self.control_set()
        out |= ctrl
        out |= {c.barred() for c in ctrl}
        for d in self.data:
            out.add(create(d))
            out.add(created(d))
        return frozenset(out)

    # -- parser context protocol --

    def resolve_action(self, head, arg, barred, pos=None):
        ctrl = self.control_set()
        if barred:
            if head == "cr" and arg is not None and arg in self.data:
                return created(arg)
            cand = Action(CONTROL, head, arg)
            if cand in ctrl:
                return cand.barred()
            raise ParseError(
                f"~{head}{'(' + arg + ')' if arg else ''} is not the barred "
                "copy of any configured control action", pos)
        if arg is not None:
            if head == "cr":
                if arg in self.data:
                    return create(arg)
                raise ParseError(f"unknown creation datum {arg!r}", pos)
            cand = Action(CONTROL, head, arg)
            if cand in ctrl:
                return cand
            raise ParseError(f"unknown action {head}({arg})", pos)
        cand = Action(CONTROL, head, None)
        if cand in ctrl:
            return cand
        if self.plain_names is None or head in self.plain_names:
            if head in _RESERVED_HEADS:
                raise ParseError(f"{head!r} is reserved", pos)
            return plain(head)
        raise ParseError(f"unknown action {head!r}", pos)

    def strategy_named(self, name):
        if name in self.strategies:
            return self.strategies[name]
        return _strategy.get_strategy(name)

    def spec_named(self, name):
        if name in self.specs:
            return self.specs[name]
        raise ParseError(f"unknown specification {name!r}")

    def creation_body(self, datum) -> Term:
        if datum in self.creation:
            return self.creation[datum]
        raise ConfigError(f"no creation body configured for datum {datum!r}")

    def gamma(self, a: Action, b: Action):
        """Result of communication, None meaning deadlock."""
        return self.comm.get(frozenset((a, b)))

    def add_spec(self, spec: RecSpec):
        if spec.name in self.specs:
            raise ConfigError(f"specification {spec.name!r} already loaded")
        self.specs[spec.name] = spec


def default_config() -> Config:
    return Config()


# ------------------------------------------------------------ validation

def validate_comm(config: Config):
    """Communication-table sanity: keys and values stay clear of control,
    barred, and creation actions, and the table is associative over the
    configured alphabet. Returns a list of violation strings, empty if ok."""
    violations = []
    ctrl = config.control_set()
    barred = {c.barred() for c in ctrl}
    for key, val in config.comm.items():
        for a in key:
            if a in ctrl or a in barred:
                violations.append(
                    f"gamma({a}, .) must be delta for control action {a}")
            if a.kind in (CREATE, CREATED):
                violations.append(
                    f"gamma({a}, .) must be delta for creation action {a}")
        if val in ctrl or val in barred:
            violations.append(
                f"gamma value {val} is a control action or its barred copy")
        if val.kind == CREATE:
            violations.append(f"gamma value {val} is a creation request")
    alphabet = sorted(config.alphabet(), key=lambda a: a.sort_key())

    def g(a, b):
        if a is None or b is None:
            return None
        return config.gamma(a, b)

    for a in alphabet:
        for b in alphabet:
            ab = g(a, b)
            for c in alphabet:
                if g(ab, c) != g(a, g(b, c)):
                    violations.append(
                        f"gamma not associative on ({a}, {b}, {c})")
                    if len(violations) > 20:
                        return violations
    return violations


def _check_names(names, what):
    for n in names:
        if not re.fullmatch(r"[A-Za-z_][A-Za-z0-9_]*", n):
            raise ConfigError(f"bad {what} name {n!r}")
        if n in _RESERVED_HEADS:
            raise ConfigError(f"{what} name {n!r} is reserved")


# ------------------------------------------------------- config file text

_STRATEGY_RE = re.compile(
    r"strategy\s+([A-Za-z_][A-Za-z0-9_]*)\s*=\s*(.+)$")
_CREATE_RE = re.compile(
    r"create\s+cr\(([A-Za-z_][A-Za-z0-9_]*)\)\s*=\s*(.+)$")
_SET_RE = re.compile(
    r"(actions|comm|control|data)\s*=\s*\{(.*)\}\s*$", re.S)


def _logical_lines(text: str):
    buf, depth = [], 0
    for raw in text.splitlines():
        line = raw.split("#", 1)[0]
        if not line.strip() and not buf:
            continue
        buf.append(line)
        depth += line.count("{") - line.count("}")
        if depth < 0:
            raise ConfigError(f"unbalanced braces near {raw.strip()!r}")
        if depth == 0:
            joined = " ".join(buf).strip()
            buf = []
            if joined:
                yield joined
    if buf and "".join(buf).strip():
        raise ConfigError("unterminated declaration at end of config")


def _split_items(body: str):
    return [part.strip() for part in body.split(",") if part.strip()]


def _parse_strategy_expr(expr: str):
    expr = expr.strip()
    if expr == "cyclic":
        return _strategy.CyclicStrategy()
    if expr == "uniform":
        return _strategy.UniformStrategy()
    m = re.fullmatch(
        r"semaphore\(\s*k\s*=\s*([0-9]+)\s*,\s*semaphores\s*=\s*"
        r"\{([^}]*)\}\s*\)", expr)
    if m:
        k = int(m.group(1))
        names = _split_items(m.group(2))
        _check_names(names, "semaphore")
        try:
            return _strategy.SemaphoreStrategy(k, names)
        except ValueError as e:
            raise ConfigError(str(e)) from None
    raise ConfigError(f"unrecognized strategy expression {expr!r}")


def parse_config(text: str) -> Config:
    cfg = Config()
    creations = []
    for line in _logical_lines(text):
        m = _SET_RE.fullmatch(line)
        if m:
            kind, body = m.group(1), m.group(2)
            items = _split_items(body)
            if kind == "actions":
                _check_names(items, "action")
                cfg.plain_names = frozenset(items) | (cfg.plain_names or frozenset())
            elif kind == "control":
                _check_names(items, "control action")
                cfg.control_bare |= set(items)
            elif kind == "data":
                _check_names(items, "datum")
                cfg.data = cfg.data | frozenset(items)
            else:
                for entry in items:
                    em = re.fullmatch(
                        r"([A-Za-z_][A-Za-z0-9_]*)\s*\*\s*"
                        r"([A-Za-z_][A-Za-z0-9_]*)\s*->\s*"
                        r"([A-Za-z_][A-Za-z0-9_]*)", entry)
                    if not em:
                        raise ConfigError(f"bad comm entry {entry!r}")
                    a, b, c = (plain(em.group(1)), plain(em.group(2)),
                               plain(em.group(3)))
                    key = frozenset((a, b))
                    if key in cfg.comm and cfg.comm[key] != c:
                        raise ConfigError(
                            f"conflicting comm results for {entry!r}")
                    cfg.comm[key] = c
            continue
        m = _STRATEGY_RE.fullmatch(line)
        if m:
            name = m.group(1)
            if name in cfg.strategies:
                raise ConfigError(f"strategy {name!r} declared twice")
            cfg.strategies[name] = _parse_strategy_expr(m.group(2))
            continue
        m = _CREATE_RE.fullmatch(line)
        if m:
            creations.append((m.group(1), m.group(2)))
            continue
        raise ConfigError(f"unrecognized config line {line!r}")

    # creation bodies parse against the finished alphabet/strategies
    for datum, body in creations:
        if datum not in cfg.data:
            raise ConfigError(f"create cr({datum}) but {datum!r} not in data")
        if datum in cfg.creation:
            raise ConfigError(f"creation body for {datum!r} declared twice")
        term = parse_term(body, cfg)
        if free_vars(term):
            raise ConfigError(f"creation body for {datum!r} is not closed")
        cfg.creation[datum] = term

    if cfg.plain_names is not None:
        for key, val in cfg.comm.items():
            for a in list(key) + [val]:
                if a.name not in cfg.plain_names:
                    raise ConfigError(
                        f"comm table mentions undeclared action {a}")

    # collisions between strategy control actions and the plain alphabet
    if cfg.plain_names:
        for c in cfg.control_set():
            if c.name in cfg.plain_names:
                raise ConfigError(
                    f"control action head {c.name!r} collides with a "
                    "declared plain action")
    violations = validate_comm(cfg)
    if violations:
        raise ConfigError("; ".join(violations[:3]))
    return cfg


def load_config(path: str) -> Config:
    with open(path, encoding="utf-8") as fh:
        return parse_config(fh.read())


def load_specs(text: str, cfg: Config):
    """Parse and register every 'spec name { ... }' block in text; later
    blocks may reference earlier ones. Guardedness is enforced."""
    out = []
    depth = 0
    start = None
    for m in re.finditer(r"[{}]|spec\b", text):
        tok = m.group()
        if tok == "spec" and depth == 0:
            if start is not None:
                raise ConfigError("nested spec blocks")
            start = m.start()
        elif tok == "{":
            depth += 1
        elif tok == "}":
            depth -= 1
            if depth == 0 and start is not None:
                block = text[start:m.end()]
                spec = parse_spec(block, cfg)
                if not spec_guarded(spec):
                    raise ConfigError(
                        f"specification {spec.name!r} not shown guarded")
                cfg.add_spec(spec)
                out.append(spec)
                start = None
    if depth != 0 or start is not None:
        raise ConfigError("unterminated spec block")
    return out


def load_spec_file(path: str, cfg: Config):
    with open(path, encoding="utf-8") as fh:
        return load_specs(fh.read(), cfg)


def load_term_file(path: str, cfg: Config):
    with open(path, encoding="utf-8") as fh:
        return parse_term_file(fh.read(), cfg)
