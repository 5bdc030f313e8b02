"""Seeded execution of closed terms.

A run alternates the two semantic phases: resolve probabilistic
branching by drawing from the exact distribution, then fire one action.
Draws map a 64-bit integer from random.Random(seed) onto [0, 1) as an
exact rational, compared against cumulative masses over the support
sorted by printed form, so a run is a pure function of the seed.
Nondeterminism between simultaneously offered actions is outside the
probabilistic model; the policy argument picks uniformly (through the
same generator), takes the first offer in the engine's order, or
refuses to choose.
"""

from __future__ import annotations

import random
from collections import Counter
from dataclasses import dataclass, field

from .meadow import Rat, ZERO
from .terms import CREATED, Scheduled
from .semantics import Engine
from .parse import print_term

TERMINATED = "terminated"
DEADLOCKED = "deadlocked"
EXHAUSTED = "step-budget-exhausted"

_SCALE = 2 ** 64


class NondetError(RuntimeError):
    """Raised under the 'error' policy when a static term offers more
    than one action."""


def _draw(rng) -> Rat:
    return Rat(rng.getrandbits(64), _SCALE)


def _pick(items, rng):
    """items: list of (thing, mass) with masses summing to one."""
    u = _draw(rng)
    acc = ZERO
    for thing, p in items:
        acc = acc + p
        if u < acc:
            return thing
    return items[-1][0]


@dataclass
class Trace:
    seed: int
    events: list = field(default_factory=list)   # (action str, state str)
    outcome: str = None
    turns: Counter = field(default_factory=Counter)

    def actions(self):
        return [a for a, _ in self.events]


def run(t, engine: Engine, seed: int, max_steps=1000,
        nondet="uniform") -> Trace:
    if nondet not in ("uniform", "first", "error"):
        raise ValueError(f"unknown nondeterminism policy {nondet!r}")
    rng = random.Random(seed)
    cfg = engine.cfg
    trace = Trace(seed)
    cur = t
    # positions of a top-level scheduled composition renumber as
    # processes leave or spawn; orig_of keeps the identity seen at the
    # first scheduled step so turn counts stay per-process
    orig_of = None
    fresh = 0
    while len(trace.events) < max_steps:
        rep = engine.resolve(cur)
        d = engine.dist(rep)
        if len(d) > 1:
            items = sorted(d.items(),
                           key=lambda up: print_term(up[0], cfg))
            cur = _pick(items, rng)
            continue
        offers = engine.steps(rep)
        if not offers:
            trace.outcome = DEADLOCKED
            return trace
        if len(offers) == 1 or nondet == "first":
            choice = offers[0]
        elif nondet == "uniform":
            choice = offers[rng.randrange(len(offers))]
        else:
            raise NondetError(
                f"{len(offers)} actions offered at "
                + print_term(rep, cfg))
        action, tgt = choice
        if isinstance(rep, Scheduled):
            n = len(rep.procs)
            if orig_of is None or len(orig_of) != n:
                orig_of = list(range(1, n + 1))
                fresh = n
            i = rep.pos
            trace.turns[orig_of[i - 1]] += 1
            if action.kind == CREATED:
                fresh += 1
                if tgt is not None and len(tgt.procs) == n + 1:
                    orig_of = orig_of + [fresh]
                else:
                    orig_of = orig_of[:i - 1] + orig_of[i:] + [fresh]
            elif tgt is None or len(tgt.procs) < n:
                orig_of = orig_of[:i - 1] + orig_of[i:]
        trace.events.append(
            (str(action), "" if tgt is None else print_term(tgt, cfg)))
        if tgt is None:
            trace.outcome = TERMINATED
            return trace
        cur = tgt
    trace.outcome = EXHAUSTED
    return trace


def stats(t, engine: Engine, runs: int, base_seed=0, max_steps=1000,
          nondet="uniform") -> dict:
    """Aggregate over runs seeded base_seed .. base_seed + runs - 1."""
    outcomes = Counter()
    action_counts = Counter()
    first_actions = Counter()
    turns = Counter()
    total_steps = 0
    for k in range(runs):
        tr = run(t, engine, base_seed + k, max_steps, nondet)
        outcomes[tr.outcome] += 1
        total_steps += len(tr.events)
        acts = tr.actions()
        action_counts.update(acts)
        if acts:
            first_actions[acts[0]] += 1
        turns.update(tr.turns)
    return {
        "runs": runs,
        "base_seed": base_seed,
        "outcomes": dict(outcomes),
        "actions": dict(action_counts),
        "first_actions": dict(first_actions),
        "turns": {str(i): turns[i] for i in sorted(turns)},
        "mean_length": total_steps / runs if runs else 0.0,
    }
