"""Shared fixtures and random term generators.

The generators produce closed terms only. Depth is tree depth;
probabilities come from a small pool that includes the boundary value 1
now and then. Static terms (probabilistic point masses on themselves)
are drawn by resolving a random term and, if it still branches, taking
one outcome of its distribution.
"""

import random

import pytest

from pacp.meadow import Rat
from pacp.terms import (Act, Alt, CMerge, DELTA, Encap, Interleave,
                        LMerge, Par, PChoice, Seq, plain, create)
from pacp.config import parse_config
from pacp.semantics import Engine

ACTIONS = ("a", "b", "c")
PROBS = (Rat(1, 2), Rat(1, 3), Rat(2, 3), Rat(1, 4), Rat(3, 4),
         Rat(1, 5), Rat(1, 1))

CONFIG_TEXT = """
actions  = { a, b, c, enter1, exit1, enter2, exit2, enter3, exit3 }
comm     = { a * b -> c }
data     = { d }
create cr(d) = b . c
strategy sem  = semaphore(k=2, semaphores={r})
strategy sem1 = semaphore(k=1, semaphores={r})
"""


@pytest.fixture(scope="session")
def cfg():
    return shared_config()


@pytest.fixture(scope="session")
def eng(cfg):
    return Engine(cfg)


def gen_term(rng, depth, creation=False):
    """Random closed term over the basic operators."""
    if depth <= 0 or rng.random() < 0.3:
        r = rng.random()
        if r < 0.75:
            return Act(plain(rng.choice(ACTIONS)))
        if r < 0.85 and creation:
            return Act(create("d"))
        return DELTA
    op = rng.randrange(8)
    if op == 0:
        return Alt(gen_term(rng, depth - 1, creation),
                   gen_term(rng, depth - 1, creation))
    if op == 1:
        return Seq(gen_term(rng, depth - 1, creation),
                   gen_term(rng, depth - 1, creation))
    if op in (2, 3):
        return PChoice(rng.choice(PROBS),
                       gen_term(rng, depth - 1, creation),
                       gen_term(rng, depth - 1, creation))
    if op == 4:
        return Par(gen_term(rng, depth - 1, creation),
                   gen_term(rng, depth - 1, creation))
    if op == 5:
        return LMerge(gen_term(rng, depth - 1, creation),
                      gen_term(rng, depth - 1, creation))
    if op == 6:
        return CMerge(gen_term(rng, depth - 1, creation),
                      gen_term(rng, depth - 1, creation))
    blocked = frozenset(plain(n) for n in
                        rng.sample(ACTIONS, rng.randrange(1, 3)))
    return Encap(blocked, gen_term(rng, depth - 1, creation))


def gen_static(rng, engine, depth=2):
    """Random static closed term."""
    t = engine.resolve(gen_term(rng, depth))
    if engine.is_static(t):
        return t
    outcomes = sorted(engine.dist(t).items(), key=lambda up: str(up[0]))
    return rng.choice(outcomes)[0]


def gen_semaphore_proc(rng, depth):
    """Process body fit for the semaphore strategy: critical sections
    bracketed by requests and releases, mixed with plain behavior."""
    from pacp.terms import control
    if rng.random() < 0.5:
        return gen_term(rng, depth)
    body = gen_term(rng, max(depth - 1, 0))
    return Seq(Act(control("P", "r")),
               Seq(body, Act(control("V", "r"))))


def gen_si(rng, strategy, depth=3, max_procs=3, proc_gen=gen_term):
    strat = shared_config().strategy_named(strategy)
    n = rng.randrange(1, max_procs + 1)
    procs = tuple(proc_gen(rng, depth) for _ in range(n))
    return Interleave(strategy, (), strat.initial_state(), procs)


_SHARED = None


def shared_config():
    global _SHARED
    if _SHARED is None:
        _SHARED = parse_config(CONFIG_TEXT)
    return _SHARED


def gen_hist(rng, n, length=None):
    """Random well-formed scheduling history for arity n, built by the
    formation rule so every prefix is well-formed too."""
    if length is None:
        length = rng.randrange(0, 4)
    if length == 0:
        return ()
    hist = []
    arity = n
    # build backwards from the final arity: predecessors differ by one
    arities = [arity]
    for _ in range(length - 1):
        prev = arities[-1] + rng.choice((-1, 0, 1))
        if prev < 1:
            prev = 1
        arities.append(prev)
    arities.reverse()
    for i, m in enumerate(arities):
        bound = arities[i - 1] if i > 0 else m
        hist.append((rng.randrange(1, bound + 1), m))
    return tuple(hist)
