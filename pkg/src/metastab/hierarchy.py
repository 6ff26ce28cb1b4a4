"""Hierarchy of reduced chains.

Starting from the original rates (rank 0), each rank is partitioned into
clusters (ergodic classes and transient singletons of its limiting jump
chain).  Clusters become the states of the next rank, with rates averaged
over the cluster's invariant measure, until a single cluster remains.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .asymptotics import ONE, ZERO, AsymptoticOrder, mul, ratio_limit, recip, scale, total
from .chain_model import ChainSpec
from .errors import EmptyRow
from .skeleton import Decomposition, decompose, skeleton_chain, stationary

__all__ = [
    "ClusterTree",
    "HierarchyLevel",
    "Hierarchy",
    "cluster_invariant_measure",
    "inverse_transition_rates",
    "reduce",
    "tilde_rates",
    "build_hierarchy",
    "hierarchy_report",
]


@dataclass
class ClusterTree:
    """Nested partitions of the state space.

    ``children[r][k]`` lists the rank-(r-1) clusters inside rank-r cluster
    ``k``; for rank 0 each cluster holds just the original state.
    """

    children: list = field(default_factory=list)
    _states: list = field(default_factory=list, repr=False)

    def add_rank(self, children) -> None:
        children = [tuple(c) for c in children]
        if not self.children:
            states = [frozenset(c) for c in children]
        else:
            prev = self._states[-1]
            states = [frozenset().union(*(prev[i] for i in c)) for c in children]
        self.children.append(children)
        self._states.append(states)

    @property
    def rho(self) -> int:
        return len(self.children) - 1

    def n(self, r: int) -> int:
        return len(self.children[r])

    def resolve(self, r: int, k: int) -> frozenset:
        """Original states ``j`` with ``j`` nested in rank-r cluster ``k``."""
        return self._states[r][k]

    def parent(self, r: int, i: int) -> int:
        """Index of the rank-(r+1) cluster containing rank-r cluster ``i``."""
        for k, ch in enumerate(self.children[r + 1]):
            if i in ch:
                return k
        raise KeyError((r, i))

    def ancestors(self, j: int) -> list:
        """``[j_0, j_1, ..., j_rho]``: the cluster index holding ``j`` at each rank."""
        chain = [j]
        for r in range(self.rho):
            chain.append(self.parent(r, chain[-1]))
        return chain


@dataclass
class HierarchyLevel:
    """Everything computed at one rank.

    ``T`` is ``None`` at the top rank (infinite exit time).  ``mu[k]`` maps
    each rank-r cluster ``i`` inside rank-(r+1) cluster ``k`` to
    ``(order, limit)``.  ``Qtilde[(k, j)]`` is the cluster-to-state rate.
    """

    rank: int
    Q: list
    T: list | None
    skeleton: np.ndarray | None
    decomposition: Decomposition | None
    mu: dict
    Qtilde: dict

    @property
    def n(self) -> int:
        return len(self.Q)


@dataclass
class Hierarchy:
    spec: ChainSpec
    levels: list
    tree: ClusterTree

    @property
    def rho(self) -> int:
        return len(self.levels) - 1

    @property
    def sizes(self) -> tuple:
        return tuple(lv.n for lv in self.levels)

    def T(self, r: int, i: int) -> AsymptoticOrder | None:
        T = self.levels[r].T
        return None if T is None else T[i]

    def mu_limit(self, r: int, k: int, i: int) -> float:
        """Limiting invariant weight of rank-r cluster ``i`` in rank-(r+1) cluster ``k``."""
        return self.levels[r].mu[k].get(i, (None, 0.0))[1]

    def labels(self, r: int, k: int) -> list:
        return [self.spec.state_labels[j] for j in sorted(self.tree.resolve(r, k))]


def inverse_transition_rates(Q) -> list:
    """Reciprocal of each row's total outgoing rate."""
    n = len(Q)
    out = []
    for i in range(n):
        s = total(Q[i][j] for j in range(n) if j != i)
        if s.is_zero:
            raise EmptyRow(i)
        out.append(recip(s))
    return out


def cluster_invariant_measure(rates, lam) -> list:
    """Leading-order invariant measure of a single-class chain.

    ``rates`` is the cluster's own rate matrix and ``lam`` the invariant
    vector of its jump chain.  The weight of state ``i`` is
    ``lam_i T_i / sum_i' lam_i' T_i'`` with ``T_i`` the mean holding time.
    Returns ``[(order, limit), ...]`` aligned with ``rates``.
    """
    k = len(rates)
    if k == 1:
        return [(ONE, 1.0)]
    T = inverse_transition_rates(rates)
    weighted = [scale(T[i], float(lam[i])) for i in range(k)]
    Tbar = total(weighted)
    inv = recip(Tbar)
    out = []
    for w in weighted:
        m = mul(w, inv)
        out.append((m, ratio_limit(m, ONE)))
    s = sum(lim for _, lim in out)
    assert abs(s - 1.0) <= 1e-10, f"cluster measure limits sum to {s}"
    return out


def reduce(Q, decomposition: Decomposition, mu: dict) -> list:
    """Rates between clusters: ``sum_{i in k, j in l} mu^k(i) Q_ij``."""
    classes = decomposition.classes
    m = len(classes)
    out = [[ZERO] * m for _ in range(m)]
    for k, ck in enumerate(classes):
        for l, cl in enumerate(classes):
            if k != l:
                out[k][l] = total(mul(mu[k][i][0], Q[i][j]) for i in ck for j in cl)
    return out


def tilde_rates(prev: dict, decomposition: Decomposition, mu: dict, states_of, n_states: int) -> dict:
    """Cluster-to-state rates one rank up.

    ``prev[(i, j)]`` are the previous rank's cluster-to-state rates and
    ``states_of(k)`` gives the original states under new cluster ``k``.
    """
    out = {}
    for k, members in enumerate(decomposition.classes):
        inside = states_of(k)
        for j in range(n_states):
            if j in inside:
                continue
            out[(k, j)] = total(mul(mu[k][i][0], prev[(i, j)]) for i in members)
    return out


def build_hierarchy(spec: ChainSpec) -> Hierarchy:
    """Construct every rank up to the first one with a single cluster."""
    n = spec.N
    tree = ClusterTree()
    tree.add_rank([(j,) for j in range(n)])
    Q = [list(row) for row in spec.rates]
    Qt = {(k, j): spec.rates[k][j] for k in range(n) for j in range(n) if k != j}
    levels = []
    r = 0
    while len(Q) > 1:
        T = inverse_transition_rates(Q)
        P = skeleton_chain(Q)
        dec = decompose(P)
        mu = {}
        for k, members in enumerate(dec.classes):
            lam = stationary(P, members)
            sub = [[Q[a][b] for b in members] for a in members]
            pairs = cluster_invariant_measure(sub, lam)
            mu[k] = dict(zip(members, pairs))
        levels.append(HierarchyLevel(r, Q, T, P, dec, mu, Qt))
        assert dec.n < len(Q), "cluster count must strictly decrease"
        tree.add_rank(dec.classes)
        Q = reduce(Q, dec, mu)
        Qt = tilde_rates(Qt, dec, mu, lambda k, rr=r + 1: tree.resolve(rr, k), n)
        r += 1
    levels.append(HierarchyLevel(r, Q, None, None, None, {}, Qt))
    assert r < max(n, 1)
    return Hierarchy(spec, levels, tree)


def _order(q: AsymptoticOrder) -> dict:
    return q.to_dict()


def hierarchy_report(h: Hierarchy) -> dict:
    """JSON-ready description of every rank."""
    ranks = []
    for lv in h.levels:
        r = lv.rank
        entry = {
            "rank": r,
            "clusters": [h.labels(r, k) for k in range(lv.n)],
            "Q": [
                {"from": k, "to": l, **_order(lv.Q[k][l])}
                for k in range(lv.n)
                for l in range(lv.n)
                if k != l
            ],
            "T": None if lv.T is None else [_order(t) for t in lv.T],
            "mu": [
                {"cluster": k, "limits": {str(i): lim for i, (_, lim) in sorted(m.items())}}
                for k, m in sorted(lv.mu.items())
            ],
        }
        ranks.append(entry)
    return {"states": list(h.spec.state_labels), "rho": h.rho, "n": list(h.sizes), "ranks": ranks}
