"""Estimator-style front end.

:class:`MetastableChain` follows the scikit-learn conventions: constructor
arguments are hyper-parameters, :meth:`~MetastableChain.fit` builds the
hierarchy and stores fitted attributes with a trailing underscore, and
:meth:`~MetastableChain.predict` returns metastable distributions for a time
scale.
"""

from __future__ import annotations

import numbers
from pathlib import Path

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_is_fitted

from .asymptotics import AsymptoticOrder
from .chain_model import ChainSpec, TimeScale, load, repair_zero_rates, spec_from_dict, validate
from .errors import ChainValidationError
from .hierarchy import build_hierarchy
from .metastable import classify_time_scale, metastable_all, metastable_distribution
from .verify import TransientSolverConfig, check_ladder, compare

__all__ = ["MetastableChain", "check_chain", "check_time_scale"]


def check_chain(X, repair: bool = False) -> ChainSpec:
    """Coerce ``X`` (spec, decoded JSON dict, or path) to a validated :class:`ChainSpec`."""
    if isinstance(X, ChainSpec):
        spec = X
    elif isinstance(X, dict):
        spec = spec_from_dict(X)
    elif isinstance(X, (str, Path)):
        spec = load(X)
    else:
        raise TypeError(f"cannot interpret {type(X).__name__} as a chain")
    if repair:
        spec = repair_zero_rates(spec)
    problems = validate(spec)
    if problems:
        raise ChainValidationError(problems)
    return spec


def check_time_scale(t) -> TimeScale:
    """Accept a :class:`TimeScale`, an order, a ``(c, b, lam)`` triple or ``"C,B,LAMBDA"``."""
    if isinstance(t, TimeScale):
        return t
    if isinstance(t, AsymptoticOrder):
        return TimeScale(t)
    if isinstance(t, str):
        return TimeScale.parse(t)
    if len(t) == 3 and all(isinstance(v, numbers.Real) for v in t):
        return TimeScale.from_triple(*t)
    raise TypeError(f"cannot interpret {t!r} as a time scale")


class MetastableChain(BaseEstimator):
    """Metastable behaviour of a chain with rates ``alpha eps^beta exp(-gamma/eps)``.

    Parameters
    ----------
    repair : bool, default=False
        Replace Zero off-diagonal rates by negligible ones before fitting.

    Attributes
    ----------
    spec_ : ChainSpec
    hierarchy_ : Hierarchy
    n_states_ : int
    rho_ : int
        Top rank of the hierarchy.
    """

    def __init__(self, repair: bool = False):
        self.repair = repair

    def fit(self, X, y=None):
        self.spec_ = check_chain(X, repair=self.repair)
        self.hierarchy_ = build_hierarchy(self.spec_)
        self.n_states_ = self.spec_.N
        self.rho_ = self.hierarchy_.rho
        return self

    def classify(self, t):
        check_is_fitted(self, "hierarchy_")
        return classify_time_scale(self.hierarchy_, check_time_scale(t))

    def predict(self, t, start=None) -> np.ndarray:
        """Metastable distribution(s) at time scale ``t``.

        Returns the full ``(N, N)`` matrix, or one row when ``start`` (index
        or label) is given.
        """
        check_is_fitted(self, "hierarchy_")
        ts = check_time_scale(t)
        if start is None:
            return metastable_all(self.hierarchy_, ts).nu
        if not isinstance(start, numbers.Integral):
            start = self.spec_.index(start)
        return metastable_distribution(self.hierarchy_, ts, int(start))

    def verify(self, t, eps_ladder, **cfg):
        """Compare predictions with numerics along ``eps_ladder``."""
        check_is_fitted(self, "hierarchy_")
        ts = check_time_scale(t)
        config = TransientSolverConfig(tuple(eps_ladder), **cfg)
        check_ladder(self.spec_, ts, config.eps_ladder)
        return compare(self.hierarchy_, ts, metastable_all(self.hierarchy_, ts), config)
