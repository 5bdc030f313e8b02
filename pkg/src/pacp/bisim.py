"""Probabilistic bisimulation by partition refinement.

Works on the extracted transition system, which alternates between
static states (offering actions) and branching states (offering a
distribution). Two partitions refine each other until neither moves: a
partition of the static states by action behavior, where a move counts
as the pair of its action and the class of the successor, and a
partition of all states by probabilistic behavior, the mass each
state's distribution puts on each static class. A static state's
distribution is the point mass on itself, so the second partition
restricted to static states never cuts finer than the first.

Both roots end up in the same class exactly when they are bisimilar.
One refinement round peels one action level, so stopping the loop after
k rounds decides equivalence up to k actions deep, agnostic beyond;
that is the bounded variant.
"""

from __future__ import annotations

from dataclasses import dataclass

from .meadow import ZERO, ONE
from .semantics import Engine, Pts


@dataclass
class Verdict:
    equivalent: bool
    states: int
    classes: int
    reason: str = None

    def as_json(self):
        out = {"verdict": "equivalent" if self.equivalent
               else "distinguished",
               "states": self.states, "classes": self.classes}
        if self.reason is not None:
            out["reason"] = self.reason
        return out


def _split(states, part, sigof):
    """Refine part on the given states by signature; renumber blocks by
    first occurrence in state order."""
    renum = {}
    out = {}
    for s in states:
        k = (part[s], sigof(s))
        b = renum.get(k)
        if b is None:
            b = len(renum)
            renum[k] = b
        out[s] = b
    changed = len(renum) > len({part[s] for s in states})
    return out, changed


def _partitions(pts: Pts, rounds=None):
    everything = list(range(len(pts)))
    statics = [s for s in everything if pts.static[s]]
    N = {s: 0 for s in statics}
    P = {s: 0 for s in everything}

    def nsig(s):
        edges = pts.action_edges[s]
        term = frozenset(a for a, tgt in edges if tgt is None)
        moves = frozenset((a, P[tgt]) for a, tgt in edges if tgt is not None)
        return (term, moves)

    def prow(s):
        if pts.static[s]:
            return {N[s]: ONE}
        row = {}
        for tgt, p in pts.dist_edges[s].items():
            b = N[tgt]
            row[b] = row.get(b, ZERO) + p
        return row

    def psig(s):
        return tuple(sorted(prow(s).items(), key=lambda bp: bp[0]))

    done = 0
    while rounds is None or done < rounds:
        n2, chn = _split(statics, N, nsig)
        N = n2
        p2, chp = _split(everything, P, psig)
        P = p2
        done += 1
        if not chn and not chp:
            break

    if __debug__ and rounds is None:
        # fixpoint audit: states sharing a class share their signatures
        for group, members, sig in ((N, statics, nsig),
                                    (P, everything, psig)):
            seen = {}
            for s in members:
                prev = seen.setdefault(group[s], sig(s))
                assert prev == sig(s), pts.states[s]
        nclass_of = {}
        for s in statics:
            prev = nclass_of.setdefault(P[s], N[s])
            assert prev == N[s]
    return N, P, prow


def _class_name(pts, N, block):
    for s in sorted(N):
        if N[s] == block:
            return pts.states[s]
    return "?"


def _reason(pts, N, P, prow, r1, r2):
    if pts.static[r1] and pts.static[r2]:
        e1, e2 = pts.action_edges[r1], pts.action_edges[r2]
        t1 = frozenset(a for a, tgt in e1 if tgt is None)
        t2 = frozenset(a for a, tgt in e2 if tgt is None)
        if t1 != t2:
            a = sorted(t1 ^ t2, key=lambda a: a.sort_key())[0]
            side = "left" if a in t1 else "right"
            return f"only the {side} side can terminate with {a}"
        m1 = frozenset((a, P[tgt]) for a, tgt in e1 if tgt is not None)
        m2 = frozenset((a, P[tgt]) for a, tgt in e2 if tgt is not None)
        diff = sorted(m1 ^ m2, key=lambda ab: (ab[0].sort_key(), ab[1]))
        if diff:
            return f"moves on {diff[0][0]} reach different classes"
        return "distinguished"
    row1, row2 = prow(r1), prow(r2)
    for b in sorted(set(row1) | set(row2)):
        p1 = row1.get(b, ZERO)
        p2 = row2.get(b, ZERO)
        if p1 != p2:
            name = _class_name(pts, N, b)
            return (f"probability of reaching the class of {name!r} "
                    f"is {p1} vs {p2}")
    return "distinguished"


def _verdict(pts, rounds=None):
    N, P, prow = _partitions(pts, rounds)
    r1, r2 = pts.initial[0], pts.initial[-1]
    classes = len(set(P.values()))
    if P[r1] == P[r2]:
        return Verdict(True, len(pts), classes)
    return Verdict(False, len(pts), classes,
                   _reason(pts, N, P, prow, r1, r2))


def bisim_equiv(t1, t2, engine: Engine, max_states=10000) -> Verdict:
    pts = engine.build_pts([t1, t2], max_states=max_states)
    return _verdict(pts)


def bounded_bisim_equiv(t1, t2, engine: Engine, depth: int,
                        max_states=10000) -> Verdict:
    """Bisimilarity up to the given number of action levels; behavior
    beyond is not examined."""
    pts = engine.build_pts([t1, t2], max_states=max_states)
    return _verdict(pts, rounds=depth)


def bisim_classes(pts: Pts):
    """Class index of every state under the finest refinement."""
    _, P, _ = _partitions(pts)
    return [P[s] for s in range(len(pts))]
