"""Engine behavior: distributions, action steps, system extraction."""

import json
import random
from pathlib import Path

import pytest
from jsonschema import validate

from pacp.meadow import Rat, ZERO, ONE
from pacp.terms import (Act, Alt, CMerge, DELTA, Encap, Interleave, LMerge,
                        Par, PChoice, Rec, RecSpec, Scheduled, Seq, Var,
                        control, create, created, plain)
from pacp.parse import parse_term, print_term
from pacp.semantics import (CapExceeded, Engine, pts_signature, pts_to_dot,
                            pts_to_json)

from conftest import gen_term

A = Act(plain("a"))
B = Act(plain("b"))
C = Act(plain("c"))
HALF = Rat(1, 2)

SCHEMA_DIR = Path(__file__).resolve().parent.parent / "src/pacp/schemas"


def dist_by_print(engine, t):
    return {print_term(u, engine.cfg): p
            for u, p in engine.dist(t).items()}


def test_dist_of_action_and_deadlock():
    e = Engine()
    assert e.dist(A) == {A: ONE}
    assert e.dist(DELTA) == {DELTA: ONE}
    assert e.is_static(A) and e.is_static(DELTA)


def test_dist_probabilistic_choice():
    e = Engine()
    assert e.dist(PChoice(HALF, A, B)) == {A: HALF, B: HALF}
    # equal outcomes merge
    assert e.dist(PChoice(HALF, A, A)) == {A: ONE}
    d = e.dist(PChoice(Rat(1, 3), PChoice(HALF, A, B), C))
    assert d == {A: Rat(1, 6), B: Rat(1, 6), C: Rat(2, 3)}
    # weight 1 collapses to the left branch
    assert e.dist(PChoice(ONE, A, B)) == {A: ONE}


def test_dist_is_compositional_product():
    e = Engine()
    ab = PChoice(HALF, A, B)
    assert e.dist(Alt(ab, C)) == {Alt(A, C): HALF, Alt(B, C): HALF}
    assert e.dist(Seq(ab, C)) == {Seq(A, C): HALF, Seq(B, C): HALF}
    d = e.dist(Par(ab, PChoice(HALF, C, DELTA)))
    assert len(d) == 4
    assert all(p == Rat(1, 4) for p in d.values())
    assert e.dist(Encap(frozenset({plain("a")}), ab)) == {
        Encap(frozenset({plain("a")}), A): HALF,
        Encap(frozenset({plain("a")}), B): HALF,
    }


def test_static_terms_are_their_own_distribution():
    e = Engine()
    rng = random.Random(7)
    for t in (Alt(A, B), Seq(A, B), Par(A, B), LMerge(A, B),
              Encap(frozenset({plain("a")}), Seq(A, B))):
        assert e.dist(t) == {t: ONE}
    for _ in range(200):
        t = gen_term(rng, 4)
        total = ZERO
        for p in e.dist(t).values():
            total = total + p
        assert total == ONE


def test_resolve_follows_point_masses():
    e = Engine()
    assert e.resolve(PChoice(ONE, A, B)) == A
    assert e.resolve(PChoice(ONE, PChoice(ONE, Seq(A, B), C), C)) == Seq(A, B)
    assert e.resolve(A) == A
    # branching terms resolve to themselves
    t = PChoice(HALF, A, B)
    assert e.resolve(t) == t


def test_steps_basic():
    e = Engine()
    assert e.steps(A) == ((plain("a"), None),)
    assert e.steps(DELTA) == ()
    assert e.steps(Alt(A, B)) == ((plain("a"), None), (plain("b"), None))
    assert e.steps(Alt(A, A)) == ((plain("a"), None),)
    assert e.steps(Seq(A, B)) == ((plain("a"), B),)
    assert e.steps(Seq(Alt(A, B), C)) == ((plain("a"), C), (plain("b"), C))


def test_steps_demand_static():
    e = Engine()
    with pytest.raises(ValueError, match="non-static"):
        e.steps(PChoice(HALF, A, B))


def test_interleaving_operators(cfg):
    e = Engine(cfg)
    assert e.steps(Par(A, B)) == (
        (plain("a"), B), (plain("b"), A), (plain("c"), None))
    assert e.steps(LMerge(A, B)) == ((plain("a"), B),)
    assert e.steps(CMerge(A, B)) == ((plain("c"), None),)
    assert e.steps(CMerge(A, C)) == ()
    assert e.steps(CMerge(Seq(A, C), B)) == ((plain("c"), C),)
    # without a communication table there is no synchronization
    bare = Engine()
    assert bare.steps(Par(A, B)) == ((plain("a"), B), (plain("b"), A))
    assert bare.steps(CMerge(A, B)) == ()


def test_encapsulation():
    e = Engine()
    H = frozenset({plain("a")})
    assert e.steps(Encap(H, Alt(A, B))) == ((plain("b"), None),)
    assert e.steps(Encap(H, A)) == ()
    assert e.steps(Encap(H, Seq(B, A))) == ((plain("b"), Encap(H, A)),)


def test_recursion_unfolds():
    # <X|s> moves to its unfolding with probability one; the unfolding
    # is the static representative
    spec = RecSpec("s", (("X", Seq(A, Var("X"))),))
    e = Engine()
    t = Rec("X", spec)
    assert e.dist(t) == {Seq(A, t): ONE}
    r = e.resolve(t)
    assert r == Seq(A, t)
    ((a, tgt),) = e.steps(r)
    assert a == plain("a") and tgt == t
    assert len(e.build_pts(t)) == 1


def test_unguarded_recursion_detected():
    spec = RecSpec("u", (("X", Alt(Var("X"), A)),))
    e = Engine()
    with pytest.raises(ValueError, match="unguarded"):
        e.dist(Rec("X", spec))


def test_scheduler_distribution(cfg):
    e = Engine(cfg)
    t = parse_term("si[uniform](a, b)", ctx=cfg)
    d = dist_by_print(e, t)
    assert d == {"posm[uniform, 1](a, b)": HALF,
                 "posm[uniform, 2](a, b)": HALF}
    # component lotteries multiply with the scheduler draw
    t2 = parse_term("si[uniform](a +[1/2] b, c)", ctx=cfg)
    d2 = dist_by_print(e, t2)
    assert len(d2) == 4
    assert all(p == Rat(1, 4) for p in d2.values())


def test_scheduler_steps(cfg):
    e = Engine(cfg)
    t = parse_term("posm[cyclic, 1](a, b)", ctx=cfg)
    assert e.steps(t) == (
        (plain("a"), Interleave("cyclic", ((1, 1),), (), (B,))),)
    # the last process's termination ends the whole composition
    last = parse_term("posm[cyclic, 1](a)", ctx=cfg)
    assert e.steps(last) == ((plain("a"), None),)
    # a non-terminating step keeps the arity and records the turn
    t3 = parse_term("posm[cyclic, 1](a . c, b)", ctx=cfg)
    assert e.steps(t3) == (
        (plain("a"), Interleave("cyclic", ((1, 2),), (), (C, B))),)


def test_creation_appends_a_process(cfg):
    e = Engine(cfg)
    body = Seq(B, C)
    t = Scheduled("cyclic", 1, (), (), (Act(create("d")), A))
    ((a, tgt),) = e.steps(t)
    assert a == created("d")
    assert tgt == Interleave("cyclic", ((1, 2),), (), (A, body))
    # creation with a continuation grows the arity
    t2 = Scheduled("cyclic", 1, (), (), (Seq(Act(create("d")), C), A))
    ((a2, tgt2),) = e.steps(t2)
    assert a2 == created("d")
    assert tgt2 == Interleave("cyclic", ((1, 3),), (), (C, A, body))


def test_blocked_scheduler_deadlocks(cfg):
    e = Engine(cfg)
    t = Interleave("sem", (), (("r", (1, 2)),), (A, B))
    assert e.dist(t) == {DELTA: ONE}


def test_build_pts_counts(cfg):
    e = Engine(cfg)
    pts = e.build_pts(parse_term("a +[1/2] b"))
    assert len(pts) == 3
    assert pts.initial == [0]
    assert not pts.static[0]
    assert pts.dist_edges[0] == {1: HALF, 2: HALF}
    spec = RecSpec("s", (("X", Seq(A, Var("X"))),))
    assert len(e.build_pts(Rec("X", spec))) == 1
    assert len(e.build_pts(parse_term("si[cyclic](a . b, c)", ctx=cfg),
                           max_states=50)) == 3


def test_build_pts_cap():
    e = Engine()
    with pytest.raises(CapExceeded) as info:
        e.build_pts(parse_term("a +[1/2] b"), max_states=2)
    assert info.value.limit == 2


def test_build_pts_order_independent(cfg):
    e = Engine(cfg)
    rng = random.Random(99)
    for _ in range(20):
        t = gen_term(rng, 4)
        base = pts_signature(e.build_pts(t))
        for seed in (1, 2):
            assert pts_signature(e.build_pts(t, order_seed=seed)) == base


def test_pts_json_matches_schema(cfg):
    e = Engine(cfg)
    pts = e.build_pts(parse_term("si[uniform](a . b, c)", ctx=cfg))
    doc = pts_to_json(pts)
    schema = json.loads((SCHEMA_DIR / "pts.json").read_text())
    validate(doc, schema)
    assert doc["initial"] == [0]
    assert any(edge.get("terminate") for edge in doc["action_edges"])


def test_pts_dot_output():
    e = Engine()
    dot = pts_to_dot(e.build_pts(parse_term("a +[1/2] b")))
    assert dot.startswith("digraph")
    assert dot.count("style=dashed") == 2
    assert "doublecircle" in dot
    assert 'shape=diamond' in dot


def test_two_roots_share_the_space():
    e = Engine()
    pts = e.build_pts([Alt(A, B), Alt(A, B)])
    assert pts.initial == [0, 0]
    pts2 = e.build_pts([A, B])
    assert pts2.initial == [0, 1]
