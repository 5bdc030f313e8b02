"""Process terms: actions, operators, recursion, interleaving operators.

Terms are immutable dataclass trees. Structural equality is term identity
throughout the package; canonical text (see parse.print_term) is used where
a hashable, order-stable key is wanted. Nothing here knows about semantics
or rewriting; this module only owns shape, well-formedness, and the
guardedness analysis for recursive specifications.
"""

from __future__ import annotations

from dataclasses import dataclass
from .meadow import Rat

# ---------------------------------------------------------------- actions

# Action kinds.  "plain" is an ordinary alphabet action; "control" is an
# action interpreted by an interleaving strategy (P(r), V(r), ...);
# "barred" is the reserved barred copy of a control action; "create" is a
# process-creation request carrying a datum; "created" its acknowledgement.
PLAIN = "plain"
CONTROL = "control"
BARRED = "barred"
CREATE = "create"
CREATED = "created"

_KIND_RANK = {PLAIN: 0, CONTROL: 1, BARRED: 2, CREATE: 3, CREATED: 4}


@dataclass(frozen=True)
class Action:
    kind: str
    name: str
    arg: str | None = None

    def __post_init__(self):
        if self.kind not in _KIND_RANK:
            raise ValueError(f"unknown action kind {self.kind!r}")
        if not self.name:
            raise ValueError("empty action name")
        if self.kind in (CREATE, CREATED) and not self.arg:
            raise ValueError("creation action needs a datum")

    def barred(self) -> "Action":
        """The barred copy of a control action."""
        if self.kind != CONTROL:
            raise ValueError(f"cannot bar {self}")
        return Action(BARRED, self.name, self.arg)

    def sort_key(self):
        return (_KIND_RANK[self.kind], self.name, self.arg or "")

    def __str__(self):
        base = self.name if self.arg is None else f"{self.name}({self.arg})"
        if self.kind in (BARRED, CREATED):
            return "~" + base
        return base


def plain(name: str) -> Action:
    return Action(PLAIN, name)


def control(name: str, arg: str | None = None) -> Action:
    return Action(CONTROL, name, arg)


def create(datum: str) -> Action:
    return Action(CREATE, "cr", datum)


def created(datum: str) -> Action:
    return Action(CREATED, "cr", datum)


# --------------------------------------------------- interleaving history

# A history is a tuple of (turn, count) pairs: who got the step, and how
# many processes remained afterwards.
Hist = tuple

def hist_ok(h: Hist, n: int) -> bool:
    """Validity of h as a history for n processes.

    Empty is valid for every n; a first pair (i, m) needs i <= m;
    consecutive pairs (i, m)(j, m') need j <= m and m' within 1 of m;
    a nonempty history must end with count n.
    """
    if n < 1:
        return False
    if not h:
        return True
    for (i, m) in h:
        if i < 1 or m < 1:
            return False
    i0, m0 = h[0]
    if i0 > m0:
        return False
    prev = m0
    for (j, m) in h[1:]:
        if j > prev or not (prev - 1 <= m <= prev + 1):
            return False
        prev = m
    return prev == n


def _hist_chain_ok(h: Hist, n: int) -> bool:
    # Relaxed variant used by term constructors: a first step may have
    # terminated the highest-indexed process, recording (m+1, m).
    if not h:
        return True
    for (i, m) in h:
        if i < 1 or m < 1:
            return False
    i0, m0 = h[0]
    if i0 > m0 + 1:
        return False
    prev = m0
    for (j, m) in h[1:]:
        if j > prev or not (prev - 1 <= m <= prev + 1):
            return False
        prev = m
    return prev == n


# ------------------------------------------------------------------ terms

class Term:
    __slots__ = ()


@dataclass(frozen=True)
class Act(Term):
    action: Action


@dataclass(frozen=True)
class Deadlock(Term):
    pass


DELTA = Deadlock()


@dataclass(frozen=True)
class Alt(Term):
    left: Term
    right: Term


@dataclass(frozen=True)
class Seq(Term):
    left: Term
    right: Term


@dataclass(frozen=True)
class PChoice(Term):
    """Probabilistic choice: left with probability prob, else right."""
    prob: Rat
    left: Term
    right: Term

    def __post_init__(self):
        if not self.prob.is_prob():
            raise ValueError(f"probability {self.prob} outside [0, 1]")


@dataclass(frozen=True)
class Par(Term):
    left: Term
    right: Term


@dataclass(frozen=True)
class LMerge(Term):
    left: Term
    right: Term


@dataclass(frozen=True)
class CMerge(Term):
    left: Term
    right: Term


@dataclass(frozen=True)
class Encap(Term):
    """Block the actions in `blocked`, turning them into deadlock."""
    blocked: frozenset
    body: Term

    def __post_init__(self):
        for a in self.blocked:
            if not isinstance(a, Action):
                raise ValueError("encapsulation set must contain actions")


@dataclass(frozen=True)
class Var(Term):
    name: str


@dataclass(frozen=True)
class RecSpec:
    """A named system of recursion equations X_i = t_i.

    Right-hand sides may use exactly the variables defined here, so every
    constant <X|spec> built from it is a closed term. Names are expected
    to be unique per session; canonical printing relies on that.
    """
    name: str
    equations: tuple

    def __post_init__(self):
        seen = set()
        for var, _rhs in self.equations:
            if var in seen:
                raise ValueError(f"duplicate equation for {var}")
            seen.add(var)
        for var, rhs in self.equations:
            loose = free_vars(rhs) - seen
            if loose:
                raise ValueError(
                    f"equation {var} uses undefined {sorted(loose)}")

    def __hash__(self):
        # specs produced by elimination can hold thousands of equations;
        # recomputing the field hash per lookup would be quadratic over
        # a state space, so it is cached on first use
        try:
            return self._hash
        except AttributeError:
            h = hash((self.name, self.equations))
            object.__setattr__(self, "_hash", h)
            return h

    def variables(self):
        return tuple(v for v, _ in self.equations)

    def _index(self):
        # elimination output is looked up per unfolding step; a linear
        # scan over a large spec would dominate exploration
        try:
            return self._byvar
        except AttributeError:
            byvar = {v: t for v, t in self.equations}
            object.__setattr__(self, "_byvar", byvar)
            return byvar

    def rhs(self, var: str) -> Term:
        return self._index()[var]


@dataclass(frozen=True)
class Rec(Term):
    """The process constant <var|spec>: the var component of spec's solution."""
    var: str
    spec: RecSpec

    def __post_init__(self):
        self.spec.rhs(self.var)


@dataclass(frozen=True)
class Interleave(Term):
    """Strategic interleaving of procs under a named strategy."""
    strategy: str
    hist: Hist
    state: object
    procs: tuple

    def __post_init__(self):
        if not self.procs:
            raise ValueError("interleaving needs at least one process")
        if not _hist_chain_ok(self.hist, len(self.procs)):
            raise ValueError(f"history {self.hist} invalid for {len(self.procs)} processes")


@dataclass(frozen=True)
class Scheduled(Term):
    """Interleaving after the scheduler picked position pos for the next step."""
    strategy: str
    pos: int
    hist: Hist
    state: object
    procs: tuple

    def __post_init__(self):
        if not self.procs:
            raise ValueError("interleaving needs at least one process")
        if not 1 <= self.pos <= len(self.procs):
            raise ValueError(f"scheduled position {self.pos} out of 1..{len(self.procs)}")
        if not _hist_chain_ok(self.hist, len(self.procs)):
            raise ValueError(f"history {self.hist} invalid for {len(self.procs)} processes")


# ------------------------------------------------------------- traversals

def children(t: Term):
    if isinstance(t, (Alt, Seq, PChoice, Par, LMerge, CMerge)):
        return (t.left, t.right)
    if isinstance(t, Encap):
        return (t.body,)
    if isinstance(t, (Interleave, Scheduled)):
        return t.procs
    return ()


def free_vars(t: Term) -> set:
    """Free recursion variables. <X|E> constants are closed."""
    if isinstance(t, Var):
        return {t.name}
    out = set()
    for c in children(t):
        out |= free_vars(c)
    return out


def subst(t: Term, binding: dict) -> Term:
    """Replace free variables by terms."""
    if isinstance(t, Var):
        return binding.get(t.name, t)
    if isinstance(t, (Act, Deadlock, Rec)):
        return t
    if isinstance(t, Alt):
        return Alt(subst(t.left, binding), subst(t.right, binding))
    if isinstance(t, Seq):
        return Seq(subst(t.left, binding), subst(t.right, binding))
    if isinstance(t, PChoice):
        return PChoice(t.prob, subst(t.left, binding), subst(t.right, binding))
    if isinstance(t, Par):
        return Par(subst(t.left, binding), subst(t.right, binding))
    if isinstance(t, LMerge):
        return LMerge(subst(t.left, binding), subst(t.right, binding))
    if isinstance(t, CMerge):
        return CMerge(subst(t.left, binding), subst(t.right, binding))
    if isinstance(t, Encap):
        return Encap(t.blocked, subst(t.body, binding))
    if isinstance(t, Interleave):
        return Interleave(t.strategy, t.hist, t.state,
                          tuple(subst(p, binding) for p in t.procs))
    if isinstance(t, Scheduled):
        return Scheduled(t.strategy, t.pos, t.hist, t.state,
                         tuple(subst(p, binding) for p in t.procs))
    raise TypeError(f"not a term: {t!r}")


def size(t: Term) -> int:
    return 1 + sum(size(c) for c in children(t))


# ----------------------------------------------------------- guardedness

def _unguarded_occurrences(t: Term, guarded: bool) -> set:
    """Variables with at least one occurrence not under an action prefix."""
    if isinstance(t, Var):
        return set() if guarded else {t.name}
    if isinstance(t, Seq):
        left = _unguarded_occurrences(t.left, guarded)
        right = _unguarded_occurrences(
            t.right, guarded or isinstance(t.left, Act))
        return left | right
    out = set()
    for c in children(t):
        out |= _unguarded_occurrences(c, guarded)
    return out


def _inline_unguarded(t: Term, eqs: dict, guarded: bool) -> Term:
    """One inlining round: unguarded variable occurrences get their RHS."""
    if isinstance(t, Var):
        if guarded or t.name not in eqs:
            return t
        return eqs[t.name]
    if isinstance(t, (Act, Deadlock, Rec)):
        return t
    if isinstance(t, Seq):
        return Seq(_inline_unguarded(t.left, eqs, guarded),
                   _inline_unguarded(t.right, eqs,
                                     guarded or isinstance(t.left, Act)))
    if isinstance(t, Alt):
        return Alt(_inline_unguarded(t.left, eqs, guarded),
                   _inline_unguarded(t.right, eqs, guarded))
    if isinstance(t, PChoice):
        return PChoice(t.prob,
                       _inline_unguarded(t.left, eqs, guarded),
                       _inline_unguarded(t.right, eqs, guarded))
    if isinstance(t, Par):
        return Par(_inline_unguarded(t.left, eqs, guarded),
                   _inline_unguarded(t.right, eqs, guarded))
    if isinstance(t, LMerge):
        return LMerge(_inline_unguarded(t.left, eqs, guarded),
                      _inline_unguarded(t.right, eqs, guarded))
    if isinstance(t, CMerge):
        return CMerge(_inline_unguarded(t.left, eqs, guarded),
                      _inline_unguarded(t.right, eqs, guarded))
    if isinstance(t, Encap):
        return Encap(t.blocked, _inline_unguarded(t.body, eqs, guarded))
    if isinstance(t, Interleave):
        return Interleave(t.strategy, t.hist, t.state,
                          tuple(_inline_unguarded(p, eqs, guarded)
                                for p in t.procs))
    if isinstance(t, Scheduled):
        return Scheduled(t.strategy, t.pos, t.hist, t.state,
                         tuple(_inline_unguarded(p, eqs, guarded)
                               for p in t.procs))
    raise TypeError(f"not a term: {t!r}")


GUARDED = "guarded"
NOT_SHOWN = "not shown guarded"


def check_guarded(spec: RecSpec, bound: int = 8) -> dict:
    """Guardedness verdict per variable.

    A variable occurrence is syntactically guarded when it sits in the
    right operand of a seq whose left operand is an action constant.
    Unguarded occurrences are inlined (definition expansion) up to `bound`
    rounds. The verdict is conservative: NOT_SHOWN never means "provably
    unguarded", only that inlining did not resolve it.
    """
    eqs = dict(spec.equations)
    verdicts = {}
    for var, rhs in spec.equations:
        t = rhs
        verdict = NOT_SHOWN
        for _ in range(bound + 1):
            if not _unguarded_occurrences(t, False):
                verdict = GUARDED
                break
            nxt = _inline_unguarded(t, eqs, False)
            if nxt == t:
                break
            t = nxt
        verdicts[var] = verdict
    return verdicts


def spec_guarded(spec: RecSpec, bound: int = 8) -> bool:
    return all(v == GUARDED for v in check_guarded(spec, bound).values())


def _memoize_term_hashes():
    # terms produced by rewriting share subterms heavily; the generated
    # field hash re-walks every path through such a DAG, so each node
    # caches its hash the first time it is asked for
    for cls in Term.__subclasses__():
        generated = cls.__dict__.get("__hash__")
        if generated is None:
            continue

        def cached(self, _generated=generated):
            try:
                return self._hash
            except AttributeError:
                h = _generated(self)
                object.__setattr__(self, "_hash", h)
                return h

        cls.__hash__ = cached


_memoize_term_hashes()
