"""Interleaving strategies: the scheduling interface and the built-ins.

A strategy decides, per turn, which interleaved process moves next. It
owns a set of control states with a distinguished initial element, a
scheduler `sched` mapping (process count, history, state) to either a
probability vector over positions or None (undefined: the whole
interleaving deadlocks), and a transformer `update` that folds every
performed action into the state. Actions in the strategy's control set
drive `update`; everything else must leave the state alone.

Built-ins: `cyclic` (deterministic round robin), `uniform` (fresh uniform
lottery each turn), and a k-turn semaphore scheduler where processes
suspend on P operations against held semaphores and wake in FIFO order
on V.
"""

from __future__ import annotations

from .meadow import Rat, ZERO, ONE
from .terms import Action, CONTROL, control


class Strategy:
    """Base interface. Control states must be immutable hashable values."""

    def initial_state(self):
        return ()

    def sched(self, n, h, s):
        """Probability vector over positions 1..n (index 0 = position 1),
        or None when no process can be given a turn."""
        raise NotImplementedError

    def update(self, n, h, s, i, a, terminated):
        """New control state after position i performed a (None = deadlock
        step, deferred mode only). `terminated` flags that the process
        finished and the list contracted."""
        return s

    def control_actions(self) -> frozenset:
        return frozenset()

    def history_abstraction(self, n, h):
        """Fingerprint of h sufficient for sched/update. Default: the
        identity, i.e. no abstraction declared."""
        return h

    # state codec for the term syntax; "-" is the unit/empty state
    def state_str(self, s) -> str:
        return "-"

    def state_parse(self, text: str):
        if text.strip() != "-":
            raise ValueError(f"unexpected control state text {text!r}")
        return ()


class CyclicStrategy(Strategy):
    """Deterministic round robin: position 1 first, then successor of the
    last turn-holder, wrapping around the current process count."""

    def sched(self, n, h, s):
        if not h:
            pick = 1
        else:
            pick = (h[-1][0] % n) + 1
        return tuple(ONE if i == pick else ZERO for i in range(1, n + 1))

    def history_abstraction(self, n, h):
        # sched only looks at the last pair
        return h[-1:]


class UniformStrategy(Strategy):
    """Fresh uniform lottery every turn; ignores history and state."""

    def sched(self, n, h, s):
        share = Rat(1, n)
        return (share,) * n

    def history_abstraction(self, n, h):
        return ()


class SemaphoreStrategy(Strategy):
    """k-turn scheduler with P/V semaphores.

    The state is a partial map from semaphore name to the FIFO queue of
    suspended positions, canonicalized as a sorted tuple of (name, queue)
    pairs; an absent semaphore is free. The running process keeps its
    turn until it has had k consecutive ones or suspends; then a uniform
    draw over the non-suspended positions picks the next.
    """

    def __init__(self, k: int, semaphores):
        if k < 1:
            raise ValueError("turn quantum k must be >= 1")
        self.k = k
        self.sems = frozenset(semaphores)

    def control_actions(self):
        out = set()
        for r in self.sems:
            out.add(control("P", r))
            out.add(control("V", r))
        return frozenset(out)

    # -- history measures --

    def _turns(self, h, i) -> int:
        """Consecutive turns of position i at the end of h."""
        count = 0
        for (j, _n) in reversed(h):
            if j != i:
                break
            count += 1
        return count

    @staticmethod
    def _waiting(s) -> set:
        out = set()
        for _r, q in s:
            out.update(q)
        return out

    def _ready(self, n, h, waiting) -> bool:
        total = sum(self._turns(h, i)
                    for i in range(1, n + 1) if i not in waiting)
        return total == 0 or total == self.k

    # -- interface --

    def sched(self, n, h, s):
        waiting = self._waiting(s)
        runnable = [i for i in range(1, n + 1) if i not in waiting]
        if not runnable:
            # nobody can move: scheduling is undefined
            return None
        if self._ready(n, h, waiting):
            share = Rat(1, len(runnable))
            return tuple(share if i in runnable else ZERO
                         for i in range(1, n + 1))
        return tuple(ONE if self._turns(h, i) != 0 else ZERO
                     for i in range(1, n + 1))

    def update(self, n, h, s, i, a, terminated):
        if terminated:
            return self._remove(s, i)
        if (isinstance(a, Action) and a.kind == CONTROL
                and a.name in ("P", "V") and a.arg in self.sems):
            r = a.arg
            held = dict(s)
            if a.name == "P":
                if not h:
                    return ((r, ()),)
                if r not in held:
                    held[r] = ()
                else:
                    held[r] = held[r] + (i,)
            else:
                if not h:
                    return ()
                if r not in held:
                    pass
                elif not held[r]:
                    del held[r]
                else:
                    held[r] = held[r][1:]
            return tuple(sorted(held.items()))
        # any other action: state untouched (empty map at the start)
        return () if not h else s

    def _remove(self, s, i):
        """Drop position i from every queue; larger positions shift down.
        A held semaphore with an emptied queue stays held."""
        out = []
        for r, q in s:
            out.append((r, tuple(j if j < i else j - 1
                                 for j in q if j != i)))
        return tuple(sorted(out))

    def history_abstraction(self, n, h):
        # Trailing-turn counts per position, capped just above the
        # quantum. The cap keeps every test sched performs intact (zero
        # tests, and sums compared against {0, k}: an uncapped sum and
        # its capped image agree on membership because any capped entry
        # already exceeds k alone), and the all-zero vector still
        # identifies the empty history, which update's initial clauses
        # need.
        return tuple(min(self._turns(h, i), self.k + 1)
                     for i in range(1, n + 1))

    def state_str(self, s) -> str:
        if not s:
            return "-"
        parts = []
        for r, q in s:
            parts.append(f"{r}:<{' '.join(str(j) for j in q)}>")
        return " ".join(parts)

    def state_parse(self, text: str):
        text = text.strip()
        if text == "-":
            return ()
        import re
        entries = []
        pos = 0
        pat = re.compile(r"\s*([A-Za-z_][A-Za-z0-9_]*):<([0-9 ]*)>")
        while pos < len(text):
            m = pat.match(text, pos)
            if not m:
                raise ValueError(f"bad semaphore state near {text[pos:]!r}")
            r, body = m.group(1), m.group(2).split()
            entries.append((r, tuple(int(x) for x in body)))
            pos = m.end()
        return tuple(sorted(entries))


# ------------------------------------------------------------- registry

_registry: dict = {}


def register_strategy(name: str, strat: Strategy) -> None:
    if name in _registry:
        raise ValueError(f"strategy {name!r} already registered")
    _registry[name] = strat


def get_strategy(name: str) -> Strategy:
    try:
        return _registry[name]
    except KeyError:
        raise ValueError(f"unknown strategy {name!r}") from None


def has_strategy(name: str) -> bool:
    return name in _registry


def cyclic_strategy() -> Strategy:
    return CyclicStrategy()


def uniform_strategy() -> Strategy:
    return UniformStrategy()


def semaphore_strategy(k: int, semaphores) -> Strategy:
    return SemaphoreStrategy(k, semaphores)


register_strategy("cyclic", CyclicStrategy())
register_strategy("uniform", UniformStrategy())


# ------------------------------------------------- validated call sites

def checked_sched(strat: Strategy, n, h, s):
    """sched with the interface contract enforced: entries are
    probabilities and sum to exactly 1."""
    vec = strat.sched(n, h, s)
    if vec is None:
        return None
    vec = tuple(vec)
    if len(vec) != n:
        raise ValueError(f"sched returned {len(vec)} entries for {n} processes")
    total = ZERO
    for p in vec:
        if not p.is_prob():
            raise ValueError(f"sched entry {p} outside [0, 1]")
        total = total + p
    if total != ONE:
        raise ValueError(f"sched entries sum to {total}, not 1")
    return vec


def checked_update(strat: Strategy, n, h, s, i, a, terminated):
    s2 = strat.update(n, h, s, i, a, terminated)
    if __debug__ and not terminated and h and a is not None \
            and a not in strat.control_actions():
        assert s2 == s, \
            f"strategy changed state on non-control action {a}"
    return s2
