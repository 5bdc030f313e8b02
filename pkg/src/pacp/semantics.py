"""Operational semantics over closed terms.

Two relations drive everything. The probabilistic move assigns every
closed term an exact one-step distribution over terms (dist); a term is
static when that distribution is the point mass on the term itself. The
action move (steps) is defined on static terms only and yields pairs of
an action with either a successor term or None for termination.

Probabilistic choice resolves before actions fire: alternative and
merge compositions multiply the component distributions pointwise onto
the recomposed targets, probabilistic choice mixes the two component
distributions over their shared support, and sequencing resolves its
head only. Scheduled interleaving first draws the scheduler's position
(weighted by the strategy) jointly with every component's probabilistic
move, then lets the drawn position act.

A term whose distribution is a point mass on a different term (an
unfolded recursion binder, or a choice that collapsed) is transparent:
resolve() follows such moves to the stable representative, and the
transition-system builder identifies the two. Transition-system states
are keyed structurally, except that scheduler histories compare by the
owning strategy's history abstraction: the raw history grows with every
turn, and only its abstraction feeds future scheduling, so states that
differ below the abstraction are operationally interchangeable and the
reachable system of a looping composition stays finite.
"""

from __future__ import annotations

import itertools
import random
from dataclasses import dataclass, field

from .meadow import Rat, ZERO, ONE
from .terms import (Act, Action, Alt, CMerge, CREATE, CREATED, Deadlock,
                    DELTA, Encap, Interleave, LMerge, Par, PChoice, Rec,
                    Scheduled, Seq, Term, Var, created, subst)
from .strategy import checked_sched, checked_update
from .config import default_config
from .parse import print_term


class CapExceeded(RuntimeError):
    def __init__(self, limit):
        super().__init__(f"state cap {limit} exceeded")
        self.limit = limit


def _combos(dists):
    """Joint support of independent component distributions."""
    for picks in itertools.product(*(d.items() for d in dists)):
        combo = tuple(u for u, _ in picks)
        w = ONE
        for _, p in picks:
            w = w * p
        yield combo, w


def _dedup(steps):
    return tuple(dict.fromkeys(steps))


def state_key(t: Term, cfg):
    """Opaque hashable identity of a term as a transition-system state:
    equal exactly for terms that denote the same state. Structural,
    except scheduler histories enter through the strategy's history
    abstraction. Identities are interned per config, so deeply shared
    terms cost one visit per distinct node, not one per path."""
    try:
        cache = cfg._state_keys
        table = cfg._key_ids
    except AttributeError:
        cache = cfg._state_keys = {}
        table = cfg._key_ids = {}
    hit = cache.get(t)
    if hit is None:
        struct = _state_key_raw(t, cfg)
        hit = table.get(struct)
        if hit is None:
            hit = len(table)
            table[struct] = hit
        cache[t] = hit
    return hit


def _state_key_raw(t: Term, cfg):
    if isinstance(t, Act):
        return ("act", t.action)
    if isinstance(t, Deadlock):
        return "delta"
    if isinstance(t, Var):
        return ("var", t.name)
    if isinstance(t, Rec):
        return ("rec", t.var, t.spec)
    if isinstance(t, (Interleave, Scheduled)):
        strat = cfg.strategy_named(t.strategy)
        pos = t.pos if isinstance(t, Scheduled) else 0
        return ("sched", t.strategy, pos,
                strat.history_abstraction(len(t.procs), t.hist), t.state,
                tuple(state_key(p, cfg) for p in t.procs))
    if isinstance(t, PChoice):
        return ("pc", t.prob, state_key(t.left, cfg),
                state_key(t.right, cfg))
    if isinstance(t, Encap):
        return ("block",
                tuple(sorted(t.blocked, key=lambda a: a.sort_key())),
                state_key(t.body, cfg))
    if isinstance(t, (Alt, Seq, Par, LMerge, CMerge)):
        return (type(t).__name__, state_key(t.left, cfg),
                state_key(t.right, cfg))
    raise TypeError(f"unknown term {t!r}")


class Engine:
    def __init__(self, config=None):
        self.cfg = config if config is not None else default_config()
        self._dist = {}
        self._steps = {}
        self._resolved = {}
        self._busy = set()

    # ------------------------------------------------- probabilistic move

    def dist(self, t: Term) -> dict:
        """One-step distribution of t, exact, summing to one. The
        returned dict is cached and must not be mutated."""
        out = self._dist.get(t)
        if out is not None:
            return out
        if t in self._busy:
            raise ValueError(
                "unguarded recursion at " + print_term(t, self.cfg))
        self._busy.add(t)
        try:
            out = self._dist_raw(t)
        finally:
            self._busy.discard(t)
        if __debug__:
            total = ZERO
            for p in out.values():
                total = total + p
            assert total == ONE, print_term(t, self.cfg)
        self._dist[t] = out
        return out

    def _dist_raw(self, t):
        if isinstance(t, (Act, Deadlock)):
            return {t: ONE}
        if isinstance(t, Alt):
            return self._product(t.left, t.right, Alt)
        if isinstance(t, Seq):
            return {Seq(u, t.right): p
                    for u, p in self.dist(t.left).items()}
        if isinstance(t, PChoice):
            dl, dr = self.dist(t.left), self.dist(t.right)
            pi = t.prob
            co = ONE - pi
            out = {}
            for z in set(dl) | set(dr):
                w = pi * dl.get(z, ZERO) + co * dr.get(z, ZERO)
                if w != ZERO:
                    out[z] = w
            return out
        if isinstance(t, (Par, LMerge, CMerge)):
            return self._product(t.left, t.right, type(t))
        if isinstance(t, Encap):
            return {Encap(t.blocked, u): p
                    for u, p in self.dist(t.body).items()}
        if isinstance(t, Rec):
            return self.dist(self._unfold(t))
        if isinstance(t, Interleave):
            return self._dist_interleave(t)
        if isinstance(t, Scheduled):
            dists = [self.dist(p) for p in t.procs]
            out = {}
            for combo, w in _combos(dists):
                tgt = Scheduled(t.strategy, t.pos, t.hist, t.state, combo)
                out[tgt] = out.get(tgt, ZERO) + w
            return out
        if isinstance(t, Var):
            raise ValueError(f"open term: unbound variable {t.name}")
        raise TypeError(f"unknown term {t!r}")

    def _product(self, x, y, ctor):
        dx, dy = self.dist(x), self.dist(y)
        out = {}
        for u, p in dx.items():
            for v, q in dy.items():
                w = ctor(u, v)
                out[w] = out.get(w, ZERO) + p * q
        return out

    def _dist_interleave(self, t):
        strat = self.cfg.strategy_named(t.strategy)
        n = len(t.procs)
        sched = checked_sched(strat, n, t.hist, t.state)
        if sched is None:
            # nobody can be scheduled: the composition deadlocks
            return {DELTA: ONE}
        dists = [self.dist(p) for p in t.procs]
        out = {}
        for combo, w in _combos(dists):
            for i in range(1, n + 1):
                share = sched[i - 1]
                if share == ZERO:
                    continue
                tgt = Scheduled(t.strategy, i, t.hist, t.state, combo)
                out[tgt] = out.get(tgt, ZERO) + share * w
        return out

    def _unfold(self, t: Rec):
        spec = t.spec
        binding = {v: Rec(v, spec) for v in spec.variables()}
        return subst(spec.rhs(t.var), binding)

    # ------------------------------------------------------- static layer

    def is_static(self, t: Term) -> bool:
        d = self.dist(t)
        if len(d) != 1:
            return False
        (u, _), = d.items()
        return u == t

    def resolve(self, t: Term) -> Term:
        """Representative of t after all trivial point-mass moves: either
        a static term or one with a genuinely branching distribution."""
        hit = self._resolved.get(t)
        if hit is not None:
            return hit
        seen = []
        cur = t
        while True:
            d = self.dist(cur)
            if len(d) == 1:
                (u, _), = d.items()
                if u != cur:
                    seen.append(cur)
                    if u in seen:
                        raise ValueError(
                            "silent cycle at " + print_term(cur, self.cfg))
                    cur = u
                    continue
            for s in seen:
                self._resolved[s] = cur
            self._resolved[t] = cur
            return cur

    def steps(self, t: Term):
        """Action moves of a static term: tuple of (action, successor),
        successor None meaning successful termination."""
        out = self._steps.get(t)
        if out is not None:
            return out
        if not self.is_static(t):
            raise ValueError(
                "steps of a non-static term: " + print_term(t, self.cfg))
        out = self._steps_raw(t)
        self._steps[t] = out
        return out

    def _steps_raw(self, t):
        if isinstance(t, Act):
            return ((t.action, None),)
        if isinstance(t, Deadlock):
            return ()
        if isinstance(t, Alt):
            return _dedup(self.steps(t.left) + self.steps(t.right))
        if isinstance(t, Seq):
            out = []
            for a, tgt in self.steps(t.left):
                out.append((a, t.right if tgt is None else Seq(tgt, t.right)))
            return _dedup(out)
        if isinstance(t, Par):
            out = []
            for a, tgt in self.steps(t.left):
                out.append((a, t.right if tgt is None else Par(tgt, t.right)))
            for a, tgt in self.steps(t.right):
                out.append((a, t.left if tgt is None else Par(t.left, tgt)))
            out.extend(self._sync_steps(t.left, t.right))
            return _dedup(out)
        if isinstance(t, LMerge):
            out = []
            for a, tgt in self.steps(t.left):
                out.append((a, t.right if tgt is None else Par(tgt, t.right)))
            return _dedup(out)
        if isinstance(t, CMerge):
            return _dedup(self._sync_steps(t.left, t.right))
        if isinstance(t, Encap):
            out = []
            for a, tgt in self.steps(t.body):
                if a in t.blocked:
                    continue
                out.append((a, None if tgt is None else Encap(t.blocked, tgt)))
            return _dedup(out)
        if isinstance(t, Scheduled):
            return self._steps_scheduled(t)
        raise ValueError(
            "steps of an unresolved term: " + print_term(t, self.cfg))

    def _sync_steps(self, x, y):
        out = []
        for a, tx in self.steps(x):
            for b, ty in self.steps(y):
                c = self.cfg.gamma(a, b)
                if c is None:
                    continue
                if tx is None and ty is None:
                    out.append((c, None))
                elif tx is None:
                    out.append((c, ty))
                elif ty is None:
                    out.append((c, tx))
                else:
                    out.append((c, Par(tx, ty)))
        return out

    def _steps_scheduled(self, t):
        strat = self.cfg.strategy_named(t.strategy)
        n = len(t.procs)
        i = t.pos
        out = []
        for a, tgt in self.steps(t.procs[i - 1]):
            if a.kind == CREATED:
                # acknowledgements are produced by the scheduler, never
                # consumed from a component
                continue
            if a.kind == CREATE:
                body = self.cfg.creation_body(a.arg)
                ack = created(a.arg)
                if tgt is None:
                    procs2 = t.procs[:i - 1] + t.procs[i:] + (body,)
                    hist2 = t.hist + ((i, n),)
                    st2 = checked_update(strat, n, t.hist, t.state, i, a,
                                         True)
                else:
                    procs2 = t.procs[:i - 1] + (tgt,) + t.procs[i:] + (body,)
                    hist2 = t.hist + ((i, n + 1),)
                    st2 = checked_update(strat, n, t.hist, t.state, i, a,
                                         False)
                out.append((ack, Interleave(t.strategy, hist2, st2, procs2)))
                continue
            if tgt is None:
                if n == 1:
                    out.append((a, None))
                    continue
                procs2 = t.procs[:i - 1] + t.procs[i:]
                hist2 = t.hist + ((i, n - 1),)
                st2 = checked_update(strat, n, t.hist, t.state, i, a, True)
            else:
                procs2 = t.procs[:i - 1] + (tgt,) + t.procs[i:]
                hist2 = t.hist + ((i, n),)
                st2 = checked_update(strat, n, t.hist, t.state, i, a, False)
            out.append((a, Interleave(t.strategy, hist2, st2, procs2)))
        return _dedup(out)

    # --------------------------------------------------- system extraction

    def build_pts(self, roots, max_states=10000, order_seed=None):
        """Reachable probabilistic transition system from one or more
        root terms. order_seed randomizes expansion order (the result is
        the same system, discovered in a different order)."""
        if isinstance(roots, Term):
            roots = [roots]
        rng = random.Random(order_seed) if order_seed is not None else None
        ids = {}
        pts = Pts(ctx=self.cfg)
        work = []

        def intern(term):
            rep = self.resolve(term)
            key = state_key(rep, self.cfg)
            sid = ids.get(key)
            if sid is None:
                sid = len(pts.terms)
                if sid >= max_states:
                    raise CapExceeded(max_states)
                ids[key] = sid
                pts.terms.append(rep)
                pts.static.append(self.is_static(rep))
                work.append(sid)
            return sid

        pts.initial = [intern(r) for r in roots]
        while work:
            if rng is not None and len(work) > 1:
                k = rng.randrange(len(work))
                work[k], work[-1] = work[-1], work[k]
            sid = work.pop()
            rep = pts.terms[sid]
            if pts.static[sid]:
                edges = []
                for a, tgt in self.steps(rep):
                    edges.append((a, None if tgt is None else intern(tgt)))
                pts.action_edges[sid] = tuple(edges)
            else:
                row = {}
                for u, p in self.dist(rep).items():
                    uid = intern(u)
                    row[uid] = row.get(uid, ZERO) + p
                pts.dist_edges[sid] = row
        return pts


@dataclass
class Pts:
    terms: list = field(default_factory=list)        # representative terms
    static: list = field(default_factory=list)
    initial: list = field(default_factory=list)      # one id per root
    action_edges: dict = field(default_factory=dict) # id -> ((a, id|None))
    dist_edges: dict = field(default_factory=dict)   # id -> {id: Rat}
    ctx: object = None
    _names: list = None

    @property
    def states(self):
        # printed forms of wide probabilistic states can dwarf the
        # system itself, so names materialize only when asked for
        if self._names is None:
            self._names = [print_term(u, self.ctx) for u in self.terms]
        return self._names

    def __len__(self):
        return len(self.terms)


def pts_signature(pts: Pts):
    """Renumbering-invariant content of a Pts, for comparing systems
    discovered in different orders within one config. States enter
    through their state identities rather than their representative
    terms, which depend on what the exploration happened to reach
    first."""
    keys = [state_key(u, pts.ctx) for u in pts.terms]
    # termination is encoded as -1; state identities are non-negative
    aedges = sorted(
        (keys[s], str(a), -1 if tgt is None else keys[tgt])
        for s, edges in pts.action_edges.items() for a, tgt in edges)
    dedges = sorted(
        (keys[s], keys[tgt], str(p))
        for s, row in pts.dist_edges.items() for tgt, p in row.items())
    return (tuple(sorted(keys)), tuple(keys[i] for i in pts.initial),
            tuple(aedges), tuple(dedges))


def pts_to_json(pts: Pts) -> dict:
    states = [{"id": i, "term": name, "static": pts.static[i]}
              for i, name in enumerate(pts.states)]
    actions = []
    for s in sorted(pts.action_edges):
        for a, tgt in pts.action_edges[s]:
            edge = {"from": s, "action": str(a)}
            if tgt is None:
                edge["terminate"] = True
            else:
                edge["to"] = tgt
            actions.append(edge)
    dist = []
    for s in sorted(pts.dist_edges):
        row = pts.dist_edges[s]
        for tgt in sorted(row):
            dist.append({"from": s, "to": tgt, "prob": str(row[tgt])})
    return {"states": states, "initial": list(pts.initial),
            "action_edges": actions, "dist_edges": dist}


def _dot_escape(text: str) -> str:
    return text.replace("\\", "\\\\").replace('"', '\\"')


def pts_to_dot(pts: Pts, name="pts") -> str:
    lines = [f"digraph {name} {{", "  rankdir=LR;"]
    terminates = any(tgt is None
                     for edges in pts.action_edges.values()
                     for _, tgt in edges)
    for i, label in enumerate(pts.states):
        shape = "ellipse" if pts.static[i] else "diamond"
        style = ' penwidth=2' if i in pts.initial else ""
        lines.append(
            f'  n{i} [label="{_dot_escape(label)}" shape={shape}{style}];')
    if terminates:
        lines.append('  done [label="" shape=doublecircle];')
    for s in sorted(pts.action_edges):
        for a, tgt in pts.action_edges[s]:
            dst = "done" if tgt is None else f"n{tgt}"
            lines.append(f'  n{s} -> {dst} [label="{_dot_escape(str(a))}"];')
    for s in sorted(pts.dist_edges):
        row = pts.dist_edges[s]
        for tgt in sorted(row):
            lines.append(
                f'  n{s} -> n{tgt} [label="{row[tgt]}" style=dashed];')
    lines.append("}")
    return "\n".join(lines) + "\n"
