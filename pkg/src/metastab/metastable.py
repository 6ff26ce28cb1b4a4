"""Metastable distributions at a given asymptotic time scale.

For a start state ``i`` the observation time ``t(eps)`` is placed against
the exit times ``T^r`` of the clusters containing ``i``.  The lowest rank
whose enclosing cluster is still unexited fixes ``r(i)``; clusters at that
rank that are themselves unexited act as traps.  Without traps the limit law
is the product of limiting invariant weights down the nesting chain; with
traps, mass first exits into the traps (a hitting problem on the limiting
jump chain) and the answer recurses from the entry states.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .asymptotics import ZERO, Relation, compare_scale
from .chain_model import TimeScale
from .errors import CriticalTimeScale, NotInCluster, UnreachableAbsorbingSet
from .hierarchy import Hierarchy
from .skeleton import hitting_distribution, skeleton_chain

__all__ = [
    "ScaleClassification",
    "TrapAnalysis",
    "StoppedChain",
    "MetastableDistribution",
    "classify_time_scale",
    "rank_and_traps",
    "product_measure",
    "build_stopped_chain",
    "exit_distribution",
    "metastable_distribution",
    "metastable_all",
    "metastable_report",
]


@dataclass
class ScaleClassification:
    """``table[(r, i)]`` compares ``t`` with ``T^r(i)`` for every rank below the top."""

    table: dict

    @property
    def critical(self) -> list:
        return [(r, i) for (r, i), c in sorted(self.table.items()) if c.relation is Relation.COMMENSURATE]


@dataclass(frozen=True)
class TrapAnalysis:
    start: int
    r: int
    k: int
    L: tuple
    l_start: int | None


@dataclass
class StoppedChain:
    """Cluster ``k`` at rank ``r + 1`` with trap clusters replaced by their states.

    ``rates`` is indexed by ``live + absorbing`` (live clusters first); rows
    of absorbing states are Zero.
    """

    r: int
    k: int
    live: tuple
    absorbing: tuple
    rates: list


@dataclass
class MetastableDistribution:
    nu: np.ndarray
    time: TimeScale
    traces: dict = field(default_factory=dict)


def _t_order(t):
    return t.order if isinstance(t, TimeScale) else t


def classify_time_scale(h: Hierarchy, t) -> ScaleClassification:
    t = _t_order(t)
    table = {}
    for lv in h.levels[:-1]:
        for i, T in enumerate(lv.T):
            table[(lv.rank, i)] = compare_scale(t, T)
    return ScaleClassification(table)


def _critical(h, t, pairs):
    return CriticalTimeScale([(r, i, h.T(r, i)) for r, i in pairs])


def _below(h, t, r, i) -> bool:
    """True iff ``t << T^r(i)``; the top rank counts as infinite."""
    if r == h.rho:
        return True
    c = compare_scale(t, h.T(r, i))
    if c.relation is Relation.COMMENSURATE:
        raise _critical(h, t, [(r, i)])
    return c.relation is Relation.MUCH_SMALLER


def rank_and_traps(h: Hierarchy, t, i: int) -> TrapAnalysis:
    t = _t_order(t)
    anc = h.tree.ancestors(i)
    for r in range(-1, h.rho):
        if _below(h, t, r + 1, anc[r + 1]):
            break
    k = anc[r + 1]
    if r < 0:
        return TrapAnalysis(i, -1, k, (), None)
    L = tuple(l for l in h.tree.children[r + 1][k] if _below(h, t, r, l))
    return TrapAnalysis(i, r, k, L, anc[r])


def product_measure(h: Hierarchy, r: int, k: int, j: int) -> float:
    """Product of limiting invariant weights along ``j``'s nesting chain up to rank ``r + 1``."""
    anc = h.tree.ancestors(j)
    if anc[r + 1] != k:
        raise NotInCluster(f"state {j} is not inside rank-{r + 1} cluster {k}")
    p = 1.0
    for s in range(r + 1):
        p *= h.mu_limit(s, anc[s + 1], anc[s])
    return p


def build_stopped_chain(h: Hierarchy, ta: TrapAnalysis) -> StoppedChain:
    r, k = ta.r, ta.k
    if not ta.L:
        raise ValueError("stopped chain needs a nonempty trap set")
    lv = h.levels[r]
    live = tuple(l for l in h.tree.children[r + 1][k] if l not in ta.L)
    E = tuple(sorted(set().union(*(h.tree.resolve(r, l) for l in ta.L))))
    size = len(live) + len(E)
    rates = [[ZERO] * size for _ in range(size)]
    for a, l in enumerate(live):
        for b, m in enumerate(live):
            if a != b:
                rates[a][b] = lv.Q[l][m]
        for b, j in enumerate(E):
            rates[a][len(live) + b] = lv.Qtilde[(l, j)]
    return StoppedChain(r, k, live, E, rates)


def exit_distribution(sc: StoppedChain, start: int) -> dict:
    """Limiting law of the first absorbing state hit from live cluster ``start``."""
    nl = len(sc.live)
    absorbing = range(nl, nl + len(sc.absorbing))
    P = skeleton_chain(sc.rates, absorbing=absorbing)
    try:
        h = hitting_distribution(P, absorbing, sc.live.index(start))
    except UnreachableAbsorbingSet as exc:
        raise UnreachableAbsorbingSet(exc.start, exc.trapped, context=sc) from None
    return {sc.absorbing[b - nl]: p for b, p in h.items()}


def _check_admissible(h, t):
    bad = classify_time_scale(h, t).critical
    if bad:
        raise _critical(h, t, bad)


def _nu(h, t, i, memo, traces, depth_left):
    if i in memo:
        return memo[i]
    ta = rank_and_traps(h, t, i)
    assert depth_left >= 0, "trap recursion exceeded its depth bound"
    row = np.zeros(h.spec.N)
    eta = None
    if not ta.L:
        for j in h.tree.resolve(ta.r + 1, ta.k):
            row[j] = product_measure(h, ta.r, ta.k, j)
    else:
        sc = build_stopped_chain(h, ta)
        eta = exit_distribution(sc, ta.l_start)
        for i2, w in eta.items():
            if w == 0.0:
                continue
            sub = rank_and_traps(h, t, i2)
            assert sub.r < ta.r, "entry state must have a strictly lower rank"
            row += w * _nu(h, t, i2, memo, traces, depth_left - 1)
    memo[i] = row
    traces[i] = (ta, eta)
    return row


def metastable_distribution(h: Hierarchy, t, i: int, *, _memo=None, _traces=None) -> np.ndarray:
    """Limit of ``P_i(X_{t(eps)} = .)`` as ``eps -> 0``.

    Raises :class:`CriticalTimeScale` if ``t`` is commensurate with any
    inverse transition rate below the top rank.
    """
    t = _t_order(t)
    _check_admissible(h, t)
    memo = {} if _memo is None else _memo
    traces = {} if _traces is None else _traces
    ta = rank_and_traps(h, t, i)
    # weights are products and sums of limits in [0, 1]; trim round-off past 1
    return np.clip(_nu(h, t, i, memo, traces, ta.r + 1), 0.0, 1.0)


def metastable_all(h: Hierarchy, t) -> MetastableDistribution:
    ts = t if isinstance(t, TimeScale) else TimeScale(t)
    memo, traces = {}, {}
    _check_admissible(h, ts.order)
    nu = np.vstack(
        [metastable_distribution(h, ts, i, _memo=memo, _traces=traces) for i in range(h.spec.N)]
    )
    return MetastableDistribution(nu, ts, traces)


def metastable_report(h: Hierarchy, md: MetastableDistribution, starts=None) -> dict:
    labels = h.spec.state_labels
    starts = range(h.spec.N) if starts is None else starts
    trace = []
    for i in starts:
        ta, eta = md.traces[i]
        trace.append(
            {
                "start": labels[i],
                "r": ta.r,
                "k": ta.k,
                "L": list(ta.L),
                "eta": None if eta is None else {labels[j]: p for j, p in eta.items()},
            }
        )
    return {
        "time": md.time.to_dict(),
        "states": list(labels),
        "starts": [labels[i] for i in starts],
        "nu": [md.nu[i].tolist() for i in starts],
        "trap_trace": trace,
    }
