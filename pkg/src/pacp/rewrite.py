"""Symbolic layer over the operational engine.

The canonical form of a finite-behavior term is a distribution over
menus: a menu is the set of (action, continuation) offers of one static
outcome, a continuation being either a canonical form or None for
termination, and the empty menu is deadlock. Menus that become equal
after canonicalizing their continuations merge, and their masses add,
so canonical equality identifies exactly the terms the axioms equate.
denote() maps a canonical form back to a term, deterministically:
summands sorted by their printed form, probabilistic branches folded
right with renormalized weights.

head_normal_form() stops after one level and keeps raw terms in the
menus. The deferred flag switches the treatment of a deadlocked
component that gets scheduled: immediately (the whole composition
deadlocks) or deferred (the remaining components keep running and the
deadlock is sequenced after them).

eliminate_si() and reduce_recursion() extract the reachable state graph
into a fresh recursive specification, merging states whose difference
is invisible to the strategy (histories compare by the strategy's own
abstraction). An acyclic graph is inlined back to a plain term.
"""

from __future__ import annotations

from dataclasses import dataclass

from .meadow import ZERO, ONE
from .terms import (Act, Alt, CMerge, DELTA, Encap, Interleave, LMerge,
                    Par, PChoice, Rec, RecSpec, Scheduled, Seq, Term, Var,
                    free_vars, subst)
from .strategy import checked_update
from .semantics import CapExceeded, Engine, state_key
from .parse import print_term


@dataclass(frozen=True)
class Canon:
    """Canonical behavior: frozenset of (menu, mass) with positive
    masses summing to one; menu: frozenset of (Action, Canon | None)."""
    branches: frozenset

    def support(self):
        return frozenset(m for m, _ in self.branches)


CANON_DELTA = Canon(frozenset({(frozenset(), ONE)}))


# --------------------------------------------------------- support layer

def _deferred_step(t, engine):
    """One deferred rewrite: a scheduled deadlocked component among
    others becomes the remaining composition sequenced before deadlock.
    Applied at action positions only; components of a scheduler are
    left to their own turn."""
    if isinstance(t, Seq):
        left = _deferred_step(t.left, engine)
        return t if left == t.left else Seq(left, t.right)
    if isinstance(t, (Alt, Par, LMerge, CMerge)):
        left = _deferred_step(t.left, engine)
        right = _deferred_step(t.right, engine)
        if left == t.left and right == t.right:
            return t
        return type(t)(left, right)
    if isinstance(t, Encap):
        body = _deferred_step(t.body, engine)
        return t if body == t.body else Encap(t.blocked, body)
    if isinstance(t, Scheduled) and len(t.procs) >= 2:
        comp = t.procs[t.pos - 1]
        if engine.is_static(comp) and not engine.steps(comp):
            strat = engine.cfg.strategy_named(t.strategy)
            n, i = len(t.procs), t.pos
            rest = Interleave(
                t.strategy, t.hist + ((i, n - 1),),
                checked_update(strat, n, t.hist, t.state, i, None, False),
                t.procs[:i - 1] + t.procs[i:])
            return Seq(rest, DELTA)
    return t


def _support(t, engine, deferred=False):
    """Static outcomes of t with their probabilities, after silent
    moves (and deferred rewriting when asked)."""
    out = {}
    stack = [(t, ONE)]
    while stack:
        u, p = stack.pop()
        u = engine.resolve(u)
        if deferred:
            u2 = _deferred_step(u, engine)
            if u2 != u:
                stack.append((u2, p))
                continue
        d = engine.dist(u)
        if len(d) == 1 and next(iter(d)) == u:
            out[u] = out.get(u, ZERO) + p
        else:
            for v, q in d.items():
                stack.append((v, p * q))
    return out


# ------------------------------------------------------- canonical forms

def normalize(t: Term, engine: Engine, deferred=False, limit=200000) -> Canon:
    """Canonical form of a finite-behavior closed term. Raises
    CapExceeded when the behavior tree exceeds the node limit (a cyclic
    recursion never has a finite tree)."""
    memo = {}
    count = [0]

    def canon(u):
        hit = memo.get(u)
        if hit is not None:
            return hit
        count[0] += 1
        if count[0] > limit:
            raise CapExceeded(limit)
        branches = {}
        for v, p in _support(u, engine, deferred).items():
            menu = frozenset(
                (a, None if tgt is None else canon(tgt))
                for a, tgt in engine.steps(v))
            branches[menu] = branches.get(menu, ZERO) + p
        c = Canon(frozenset(branches.items()))
        memo[u] = c
        return c

    try:
        return canon(t)
    except RecursionError:
        raise CapExceeded(limit) from None


def denote(c: Canon, ctx=None) -> Term:
    """Deterministic term rendering of a canonical form."""
    def menu_term(menu):
        entries = []
        for a, cont in menu:
            entries.append(Act(a) if cont is None
                           else Seq(Act(a), denote(cont, ctx)))
        if not entries:
            return DELTA
        entries.sort(key=lambda u: print_term(u, ctx))
        acc = entries[-1]
        for u in reversed(entries[:-1]):
            acc = Alt(u, acc)
        return acc

    branches = sorted(((menu_term(m), p) for m, p in c.branches),
                      key=lambda pair: print_term(pair[0], ctx))
    acc, rest = branches[-1]
    for u, p in reversed(branches[:-1]):
        rest = rest + p
        acc = PChoice(p / rest, u, acc)
    return acc


def canonical(t: Term, engine: Engine, deferred=False, limit=200000) -> Term:
    return denote(normalize(t, engine, deferred, limit), engine.cfg)


def summand(x: Term, y: Term, engine: Engine) -> bool:
    """Does x contribute nothing new to y, i.e. y and y + x coincide."""
    return normalize(Alt(y, x), engine) == normalize(y, engine)


def psummand(x: Term, y: Term, engine: Engine) -> bool:
    """Is y a probabilistic mixture giving x positive weight: whether
    y equals x +[p] z for some p in (0, 1] and some z. Holds exactly
    when every outcome of x is an outcome of y."""
    cx = normalize(x, engine)
    cy = normalize(y, engine)
    return cx.support() <= cy.support()


def unfold(t: Term, depth: int, engine: Engine) -> Term:
    """Approximant of t: behavior truncated to the given number of
    action levels, deadlock beyond."""
    memo = {}

    def go(u, k):
        if k <= 0:
            return CANON_DELTA
        hit = memo.get((u, k))
        if hit is not None:
            return hit
        branches = {}
        for v, p in _support(u, engine).items():
            menu = frozenset(
                (a, None if tgt is None else go(tgt, k - 1))
                for a, tgt in engine.steps(v))
            branches[menu] = branches.get(menu, ZERO) + p
        c = Canon(frozenset(branches.items()))
        memo[(u, k)] = c
        return c

    return denote(go(t, depth), engine.cfg)


def head_normal_form(t: Term, engine: Engine, deferred=False):
    """One resolution level: tuple of (menu, mass) sorted by outcome
    print, menus holding raw successor terms (None for termination)."""
    sup = _support(t, engine, deferred)
    keyed = sorted(sup.items(),
                   key=lambda up: print_term(up[0], engine.cfg))
    return tuple((tuple(engine.steps(u)), p) for u, p in keyed)


# ----------------------------------------------- state-graph extraction

def _systemize(t, engine, max_equations, deferred):
    cfg = engine.cfg
    keys = {}
    rep_of = {}
    eqs = {}
    order = []
    work = []

    def var_for(term):
        rep = engine.resolve(term)
        if deferred:
            while True:
                r2 = _deferred_step(rep, engine)
                if r2 == rep:
                    break
                rep = engine.resolve(r2)
        k = state_key(rep, cfg)
        v = keys.get(k)
        if v is None:
            if len(keys) >= max_equations:
                raise CapExceeded(max_equations)
            v = f"X{len(keys)}"
            keys[k] = v
            rep_of[v] = rep
            order.append(v)
            work.append(v)
        return v

    root = var_for(t)
    while work:
        v = work.pop()
        rep = rep_of[v]
        if engine.is_static(rep):
            entries = []
            for a, tgt in engine.steps(rep):
                entries.append(Act(a) if tgt is None
                               else Seq(Act(a), Var(var_for(tgt))))
            if not entries:
                rhs = DELTA
            else:
                rhs = entries[-1]
                for u in reversed(entries[:-1]):
                    rhs = Alt(u, rhs)
        else:
            weight = {}
            for u, p in _support(rep, engine, deferred).items():
                w = var_for(u)
                weight[w] = weight.get(w, ZERO) + p
            pairs = sorted(weight.items(), key=lambda wp: int(wp[0][1:]))
            rhs, rest = Var(pairs[-1][0]), pairs[-1][1]
            for w, p in reversed(pairs[:-1]):
                rest = rest + p
                rhs = PChoice(p / rest, Var(w), rhs)
        eqs[v] = rhs

    # inline when the dependency graph is acyclic
    color = {}
    cyclic = False

    def visit(v):
        nonlocal cyclic
        color[v] = 1
        for u in free_vars(eqs[v]):
            c = color.get(u)
            if c == 1:
                cyclic = True
            elif c is None:
                visit(u)
        color[v] = 2

    visit(root)
    if not cyclic:
        inlined = {}

        def inline(v):
            hit = inlined.get(v)
            if hit is None:
                body = eqs[v]
                hit = subst(body, {u: inline(u) for u in free_vars(body)})
                inlined[v] = hit
            return hit

        return inline(root)
    spec = RecSpec("sys", tuple((v, eqs[v]) for v in order))
    return Rec(root, spec)


def eliminate_si(t: Term, engine: Engine, max_equations=10000,
                 deferred=False) -> Term:
    """Equivalent term with every scheduled composition expanded away.
    The result mentions only actions, deadlock, the three basic
    compositions of the equation bodies, and possibly a fresh recursive
    specification when the state graph has cycles."""
    return _systemize(t, engine, max_equations, deferred)


def reduce_recursion(spec: RecSpec, root: str, engine: Engine,
                     max_equations=10000) -> Term:
    """Reachable-part extraction of <root|spec>: equivalent recursion
    over at most max_equations states, inlined to a plain term when
    finite-behavior."""
    return _systemize(Rec(root, spec), engine, max_equations, False)
