"""Brute-force numerics at concrete eps, used to check the asymptotic predictions."""

from __future__ import annotations

import csv
import io
import math
import warnings
from dataclasses import dataclass, field

import numba
import numpy as np

from .asymptotics import log_evaluate
from .chain_model import ChainSpec, GeneratorMatrix, TimeScale, instantiate_generator
from .errors import JumpCapSaturated, LadderRangeError, ScalingOverflow, SingularSystem
from .hierarchy import Hierarchy

__all__ = [
    "TransientSolverConfig",
    "OccupationStats",
    "ComparisonReport",
    "transient_matrix",
    "transient_distribution",
    "simulate_paths",
    "exact_stationary",
    "check_ladder",
    "compare",
]

LADDER_CAP = 60.0
_CHUNK = 4096


@dataclass(frozen=True)
class TransientSolverConfig:
    eps_ladder: tuple
    method: str = "expm"
    paths: int = 10_000
    jump_cap: int = 10_000_000
    rng_seed: int = 0

    def __post_init__(self):
        ladder = tuple(float(e) for e in self.eps_ladder)
        object.__setattr__(self, "eps_ladder", ladder)
        if not ladder:
            raise ValueError("eps_ladder must be nonempty")
        if any(e <= 0 for e in ladder) or any(b >= a for a, b in zip(ladder, ladder[1:])):
            raise ValueError("eps_ladder must be positive and strictly decreasing")
        if self.method not in ("expm", "mc"):
            raise ValueError(f"unknown method {self.method!r}")
        if self.paths < 1 or self.jump_cap < 1:
            raise ValueError("paths and jump_cap must be positive")


@dataclass
class OccupationStats:
    mean: np.ndarray
    stderr: np.ndarray
    paths: int
    capped: int = 0


def _matrix(G):
    return G.entries if isinstance(G, GeneratorMatrix) else np.asarray(G, dtype=float)


def transient_matrix(G, t: float) -> np.ndarray:
    """``exp(t G)`` by scaling and squaring, renormalising rows after each squaring."""
    G = _matrix(G)
    n = G.shape[0]
    if not t > 0:
        raise ValueError(f"t={t} must be positive")
    gnorm = np.max(np.abs(G).sum(axis=1)) if n else 0.0
    if gnorm == 0.0:
        return np.eye(n)
    log2_norm = math.log2(t) + math.log2(gnorm)
    s = max(0, math.ceil(log2_norm + 1.0))  # ||tG|| / 2^s <= 0.5
    if s > 1024:
        raise ScalingOverflow(f"||tG|| = 2^{log2_norm:.1f} needs {s} squarings")
    B = G * math.ldexp(t, -s)
    M = np.eye(n)
    term = np.eye(n)
    for k in range(1, 40):
        term = term @ B / k
        M = M + term
        if np.max(np.abs(term)) < 1e-18:
            break
    M = _renormalise(np.clip(M, 0.0, None), check=False)
    for _ in range(s):
        M = _renormalise(M @ M)
    return M


def _renormalise(M, check=True):
    rs = M.sum(axis=1)
    drift = np.max(np.abs(rs - 1.0))
    if check and drift > 1e-8:
        raise AssertionError(f"row sums drifted by {drift:.3g} in one squaring")
    return M / rs[:, None]


def transient_distribution(G, t: float, i: int) -> np.ndarray:
    """Row ``i`` of ``exp(t G)``: the law of the chain at time ``t`` started at ``i``."""
    return transient_matrix(G, t)[i]


def exact_stationary(G) -> np.ndarray:
    """Stationary vector of an irreducible generator.

    Uses the GTH state-reduction elimination, which involves no subtractions
    and stays accurate when rates differ by many orders of magnitude.
    """
    A = _matrix(G).astype(float).copy()
    n = A.shape[0]
    if n == 1:
        return np.ones(1)
    np.fill_diagonal(A, 0.0)
    s = np.zeros(n)
    for k in range(n - 1, 0, -1):
        s[k] = A[k, :k].sum()
        if not s[k] > 0:
            raise SingularSystem("generator is not irreducible")
        A[:k, :k] += np.outer(A[:k, k], A[k, :k]) / s[k]
    pi = np.zeros(n)
    pi[0] = 1.0
    for k in range(1, n):
        pi[k] = pi[:k] @ A[:k, k] / s[k]
    pi /= pi.sum()
    Gm = _matrix(G)
    resid = np.max(np.abs(pi @ Gm))
    if resid > 1e-10 * np.max(np.abs(Gm)):
        raise SingularSystem(f"stationary residual {resid:.3g}")
    return pi


@numba.njit(cache=True)
def _run_chunk(rng, out_rate, cum, t, start, jump_cap, ends, occ, clock, capped):
    n = out_rate.shape[0]
    for p in range(ends.shape[0]):
        s = start
        now = 0.0
        jumps = 0
        while True:
            r = out_rate[s]
            rem = t - now
            if r <= 0.0:
                occ[p, s] += rem
                now = t
                break
            hold = rng.exponential(1.0) / r
            if hold >= rem:
                occ[p, s] += rem
                now = t
                break
            occ[p, s] += hold
            now += hold
            u = rng.random()
            nxt = 0
            while nxt < n - 1 and cum[s, nxt] <= u:
                nxt += 1
            s = nxt
            jumps += 1
            if jumps >= jump_cap:
                capped[p] = True
                break
        ends[p] = s
        clock[p] = now


def simulate_paths(G, t: float, i: int, cfg: TransientSolverConfig):
    """Jump-chain simulation of ``cfg.paths`` trajectories up to time ``t``.

    Returns the empirical law of the state at ``t`` and the mean fraction of
    time spent in each state.  Paths are processed in fixed-size chunks, each
    with its own stream spawned from ``cfg.rng_seed``, so results depend only
    on the config.  A path stopped by the jump cap reports its state at the
    cap and occupation fractions over the time it covered.
    """
    G = _matrix(G)
    n = G.shape[0]
    out_rate = -np.diag(G).copy()
    with np.errstate(divide="ignore", invalid="ignore"):
        jump = np.where(out_rate[:, None] > 0, G / out_rate[:, None], 0.0)
    np.fill_diagonal(jump, 0.0)
    cum = np.cumsum(jump, axis=1)
    for s in range(n):
        nz = np.flatnonzero(jump[s])
        if len(nz):
            cum[s, nz[-1]:] = 1.0  # no round-off mass past the last target

    n_chunks = -(-cfg.paths // _CHUNK)
    streams = np.random.SeedSequence(cfg.rng_seed).spawn(n_chunks)
    ends = np.zeros(cfg.paths, dtype=np.int64)
    occ = np.zeros((cfg.paths, n))
    clock = np.zeros(cfg.paths)
    capped = np.zeros(cfg.paths, dtype=np.bool_)
    for c, ss in enumerate(streams):
        sl = slice(c * _CHUNK, min((c + 1) * _CHUNK, cfg.paths))
        _run_chunk(
            np.random.default_rng(ss), out_rate, cum, float(t), int(i), int(cfg.jump_cap),
            ends[sl], occ[sl], clock[sl], capped[sl],
        )
    n_capped = int(capped.sum())
    if n_capped > 0.01 * cfg.paths:
        warnings.warn(
            f"{n_capped} of {cfg.paths} paths hit the jump cap; results unreliable",
            JumpCapSaturated,
            stacklevel=2,
        )
    fractions = occ / clock[:, None]
    end_dist = np.bincount(ends, minlength=n) / cfg.paths
    se = fractions.std(axis=0, ddof=1) / math.sqrt(cfg.paths) if cfg.paths > 1 else np.zeros(n)
    return end_dist, OccupationStats(fractions.mean(axis=0), se, cfg.paths, n_capped)


def check_ladder(spec: ChainSpec, t: TimeScale, ladder, cap: float = LADDER_CAP) -> None:
    """Reject eps values at which exponentials leave a safe double range."""
    gammas = [q.gamma for _, _, q in spec.nonzero_rates()]
    spread = (max(gammas) - min(gammas)) if gammas else 0.0
    for eps in ladder:
        if spread / eps > cap or abs(t.lam) / eps > cap:
            raise LadderRangeError(
                f"eps={eps}: gamma spread/eps={spread / eps:.1f}, |lambda|/eps="
                f"{abs(t.lam) / eps:.1f}; both must be <= {cap:g}"
            )


@dataclass
class ComparisonReport:
    time: TimeScale
    method: str
    starts: list
    predicted: np.ndarray
    eps: list
    numeric: list
    errors: list
    monotone: bool
    stderr: list = field(default_factory=list)

    @property
    def final_error(self) -> float:
        return self.errors[-1]

    def to_dict(self, labels=None) -> dict:
        lab = (lambda i: labels[i]) if labels is not None else (lambda i: i)
        return {
            "time": self.time.to_dict(),
            "method": self.method,
            "starts": [lab(i) for i in self.starts],
            "predicted": self.predicted.tolist(),
            "ladder": [
                {"eps": e, "numeric": num.tolist(), "max_error": err}
                for e, num, err in zip(self.eps, self.numeric, self.errors)
            ],
            "monotone": self.monotone,
            "final_error": self.final_error,
        }

    def to_csv(self, labels=None) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["eps", "start", "state", "predicted", "numeric", "abs_error"])
        n = self.predicted.shape[1]
        lab = (lambda i: labels[i]) if labels is not None else (lambda i: i)
        for e, num in zip(self.eps, self.numeric):
            for a, i in enumerate(self.starts):
                for j in range(n):
                    p, x = self.predicted[a, j], num[a, j]
                    w.writerow([repr(float(e)), lab(i), lab(j), repr(float(p)), repr(float(x)), repr(float(abs(p - x)))])
        return buf.getvalue()


def compare(h: Hierarchy, t: TimeScale, nu, cfg: TransientSolverConfig, starts=None) -> ComparisonReport:
    """Tabulate numeric laws at ``t(eps)`` against the predicted rows along the ladder."""
    nu_mat = nu.nu if hasattr(nu, "nu") else np.asarray(nu)
    starts = list(range(h.spec.N)) if starts is None else list(starts)
    pred = nu_mat[starts]
    numeric, errors, stderr = [], [], []
    for eps in cfg.eps_ladder:
        lt = log_evaluate(t.order, eps)
        if lt > 709.0:
            raise OverflowError(f"t(eps) overflows at eps={eps}")
        tt = math.exp(lt)
        G = instantiate_generator(h.spec, eps)
        if cfg.method == "expm":
            M = transient_matrix(G, tt)
            rows = M[starts]
        else:
            rows = np.vstack([simulate_paths(G, tt, i, cfg)[0] for i in starts])
            stderr.append(np.sqrt(rows * (1 - rows) / cfg.paths))
        assert np.all(np.abs(rows.sum(axis=1) - 1.0) <= 1e-8)
        numeric.append(rows)
        errors.append(float(np.max(np.abs(rows - pred))))
    # 1e-12 absorbs round-off once both errors sit at the double floor
    monotone = all(b <= a + 1e-12 for a, b in zip(errors, errors[1:]))
    return ComparisonReport(t, cfg.method, starts, pred, list(cfg.eps_ladder), numeric, errors, monotone, stderr)
