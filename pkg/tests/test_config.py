"""Configuration text: alphabets, communication, strategies, creation."""

import pytest

from pacp.config import (Config, ConfigError, default_config, load_specs,
                         parse_config, validate_comm)
from pacp.parse import ParseError, parse_term
from pacp.terms import Seq, Act, control, create, created, plain


def test_default_config_is_open():
    cfg = default_config()
    assert cfg.plain_names is None
    assert parse_term("anything", ctx=cfg) == Act(plain("anything"))
    assert cfg.gamma(plain("a"), plain("b")) is None


def test_actions_close_the_alphabet():
    cfg = parse_config("actions = { a, b }")
    assert cfg.plain_names == frozenset({"a", "b"})
    with pytest.raises(ParseError):
        parse_term("c", ctx=cfg)


def test_comm_table():
    cfg = parse_config("""
    actions = { a, b, c }
    comm = { a * b -> c }
    """)
    assert cfg.gamma(plain("a"), plain("b")) == plain("c")
    assert cfg.gamma(plain("b"), plain("a")) == plain("c")
    assert cfg.gamma(plain("a"), plain("c")) is None
    with pytest.raises(ConfigError, match="undeclared"):
        parse_config("actions = { a }\ncomm = { a * x -> a }")
    with pytest.raises(ConfigError, match="conflicting"):
        parse_config("comm = { a * b -> c, b * a -> d }")


def test_comm_associativity_checked():
    # a*b -> a fails on (a, b, b): (a|b)|b communicates again, a|(b|b) not
    with pytest.raises(ConfigError, match="associative"):
        parse_config("comm = { a * b -> a }")


def test_strategy_declarations():
    cfg = parse_config("""
    strategy rr  = cyclic
    strategy lot = uniform
    strategy gate = semaphore(k=3, semaphores={r, s})
    """)
    assert cfg.strategy_named("rr").sched(2, (), ()) is not None
    assert cfg.strategy_named("gate").k == 3
    # global names stay visible
    assert cfg.strategy_named("cyclic") is not None
    with pytest.raises(ValueError):
        cfg.strategy_named("nope")
    with pytest.raises(ConfigError):
        parse_config("strategy x = cyclic\nstrategy x = uniform")
    with pytest.raises(ConfigError):
        parse_config("strategy b = semaphore(k=0, semaphores={r})")


def test_semaphore_strategy_brings_control_actions():
    cfg = parse_config("strategy sem = semaphore(k=1, semaphores={r})")
    ctrl = cfg.control_set()
    assert control("P", "r") in ctrl
    assert control("V", "r") in ctrl
    assert parse_term("P(r)", ctx=cfg) == Act(control("P", "r"))


def test_control_plain_collision_rejected():
    with pytest.raises(ConfigError, match="collides"):
        parse_config("""
        actions = { P }
        strategy sem = semaphore(k=1, semaphores={r})
        control = { P }
        """)


def test_creation():
    cfg = parse_config("""
    data = { d }
    create cr(d) = a . b
    """)
    assert cfg.creation_body("d") == Seq(Act(plain("a")), Act(plain("b")))
    assert create("d") in cfg.alphabet()
    assert created("d") in cfg.alphabet()
    with pytest.raises(ConfigError):
        cfg.creation_body("x")
    with pytest.raises(ConfigError, match="not in data"):
        parse_config("create cr(d) = a")
    with pytest.raises(ConfigError, match="twice"):
        parse_config("data = { d }\ncreate cr(d) = a\ncreate cr(d) = b")


def test_multiline_braces_and_comments():
    cfg = parse_config("""
    # the alphabet spans lines
    actions = { a,
                b,    # inline note
                c }
    """)
    assert cfg.plain_names == frozenset({"a", "b", "c"})
    with pytest.raises(ConfigError, match="unbalanced|unterminated"):
        parse_config("actions = { a,")
    with pytest.raises(ConfigError, match="unrecognized"):
        parse_config("frobnicate = yes")


def test_validate_comm_flags_reserved_actions():
    cfg = parse_config("strategy sem = semaphore(k=1, semaphores={r})")
    cfg.comm[frozenset((control("P", "r"), plain("x")))] = plain("y")
    bad = validate_comm(cfg)
    assert any("control action" in v for v in bad)


def test_load_specs():
    cfg = default_config()
    specs = load_specs("""
    spec one { X = a . X; }
    spec two { Y = b . <X|one>; }
    """, cfg)
    assert [s.name for s in specs] == ["one", "two"]
    assert cfg.spec_named("one").variables() == ("X",)
    with pytest.raises(ConfigError, match="already loaded"):
        load_specs("spec one { Z = a; }", cfg)
    with pytest.raises(ConfigError, match="guarded"):
        load_specs("spec ung { W = W + a; }", default_config())


def test_bad_names_rejected():
    with pytest.raises(ConfigError):
        parse_config("actions = { 9lives }")
    with pytest.raises(ConfigError):
        parse_config("actions = { si }")
    with pytest.raises(ConfigError):
        parse_config("data = { cr }")
