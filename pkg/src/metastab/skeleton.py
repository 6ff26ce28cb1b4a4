"""Limiting jump chain of a rate matrix and the linear algebra built on it."""

from __future__ import annotations

import enum
from collections import deque
from dataclasses import dataclass

import numpy as np
from scipy.sparse.csgraph import connected_components

from .asymptotics import ratio_limit, total
from .errors import EmptyRow, SingularSystem, UnreachableAbsorbingSet

__all__ = [
    "ClassKind",
    "Decomposition",
    "skeleton_chain",
    "decompose",
    "stationary",
    "hitting_distribution",
]


def skeleton_chain(rates, absorbing=()) -> np.ndarray:
    """Transition matrix of the limiting jump chain.

    ``P[i, j]`` is the limit of ``q_ij / sum_j' q_ij'`` as ``eps -> 0``.
    Rows listed in ``absorbing`` are left at zero (used for stopped chains).

    Parameters
    ----------
    rates : square nested sequence of AsymptoticOrder
        Off-diagonal rates; the diagonal is ignored.
    absorbing : iterable of int, optional
        States whose rows are not computed.
    """
    n = len(rates)
    absorbing = set(absorbing)
    P = np.zeros((n, n))
    for i in range(n):
        if i in absorbing:
            continue
        row = [rates[i][j] for j in range(n) if j != i]
        out = total(row)
        if out.is_zero:
            raise EmptyRow(i)
        for j in range(n):
            if j != i:
                P[i, j] = ratio_limit(rates[i][j], out)
    return P


class ClassKind(enum.Enum):
    ERGODIC = "ergodic"
    TRANSIENT = "transient"


@dataclass(frozen=True)
class Decomposition:
    """Ergodic classes (smallest member first) followed by transient singletons."""

    classes: tuple
    kinds: tuple

    @property
    def n(self) -> int:
        return len(self.classes)

    def class_of(self, state: int) -> int:
        for k, members in enumerate(self.classes):
            if state in members:
                return k
        raise KeyError(state)


def decompose(P: np.ndarray) -> Decomposition:
    n = P.shape[0]
    adj = P > 0
    _, labels = connected_components(adj.astype(np.int8), directed=True, connection="strong")
    closed = {}
    for c in np.unique(labels):
        members = np.flatnonzero(labels == c)
        leaves = adj[members][:, labels != c].any()
        closed[c] = not leaves
    ergodic = sorted(
        (tuple(int(s) for s in np.flatnonzero(labels == c)) for c, ok in closed.items() if ok),
        key=lambda m: m[0],
    )
    transient = [(s,) for s in range(n) if not closed[labels[s]]]
    classes = tuple(ergodic) + tuple(transient)
    kinds = (ClassKind.ERGODIC,) * len(ergodic) + (ClassKind.TRANSIENT,) * len(transient)
    return Decomposition(classes, kinds)


def stationary(P: np.ndarray, members) -> np.ndarray:
    """Invariant probability vector of ``P`` restricted to a closed class.

    Returned in the order of ``members``.
    """
    idx = list(members)
    k = len(idx)
    if k == 1:
        return np.ones(1)
    sub = P[np.ix_(idx, idx)]
    A = (sub - np.eye(k)).T
    A[-1, :] = 1.0
    b = np.zeros(k)
    b[-1] = 1.0
    try:
        lam = np.linalg.solve(A, b)
    except np.linalg.LinAlgError as exc:
        raise SingularSystem(f"class {idx} is not irreducible") from exc
    if not np.all(np.isfinite(lam)) or np.any(lam <= 0):
        raise SingularSystem(f"class {idx} is not irreducible")
    resid = np.max(np.abs(lam @ sub - lam))
    if resid > 1e-10:
        raise SingularSystem(f"stationary residual {resid:.3g} on class {idx}")
    return lam


def _reach(adj, sources, blocked):
    seen = set(sources)
    queue = deque(sources)
    while queue:
        x = queue.popleft()
        if x in blocked:
            continue
        for y in np.flatnonzero(adj[x]):
            y = int(y)
            if y not in seen:
                seen.add(y)
                queue.append(y)
    return seen


def hitting_distribution(P: np.ndarray, absorbing, start: int) -> dict:
    """Distribution of the first state hit in ``absorbing``, starting at ``start``.

    Solves ``h_x = sum_y P_xy h_y`` off the absorbing set with indicator
    boundary values.  Raises :class:`UnreachableAbsorbingSet` if some state
    reachable from ``start`` cannot go on to the absorbing set.
    """
    E = sorted(set(int(e) for e in absorbing))
    if not E:
        raise ValueError("absorbing set must be nonempty")
    if start in E:
        return {j: float(j == start) for j in E}
    adj = P > 0
    Eset = set(E)
    forward = _reach(adj, [start], Eset)
    live = sorted(forward - Eset)
    backward = _reach(adj.T, E, set())
    trapped = [x for x in live if x not in backward]
    if trapped:
        raise UnreachableAbsorbingSet(start, trapped)
    A = np.eye(len(live)) - P[np.ix_(live, live)]
    B = P[np.ix_(live, E)]
    try:
        H = np.linalg.solve(A, B)
    except np.linalg.LinAlgError as exc:
        raise SingularSystem("hitting system is singular") from exc
    h = np.clip(H[live.index(start)], 0.0, 1.0)
    s = h.sum()
    if abs(s - 1.0) > 1e-10:
        raise SingularSystem(f"hitting probabilities sum to {s!r}")
    return {j: float(p) for j, p in zip(E, h)}
