"""Chain specifications, time scales and their numeric instantiation.

A chain is a list of state labels plus an off-diagonal matrix of
:class:`~metastab.asymptotics.AsymptoticOrder` rates.  The JSON chain file
looks like::

    {"states": ["a", "b"],
     "rates": [{"from": 0, "to": 1, "alpha": 1.0, "beta": 0.0, "gamma": 1.0}, ...]}

Pairs absent from ``"rates"`` are Zero rates.
"""

from __future__ import annotations

import json
import math
import warnings
from dataclasses import dataclass
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np

from .asymptotics import ZERO, AsymptoticOrder, evaluate, make
from .errors import NonFinite, NonPositiveCoefficient, ParseError, UnderflowWarning

__all__ = [
    "ChainSpec",
    "TimeScale",
    "GeneratorMatrix",
    "ZeroRate",
    "DuplicateLabel",
    "EmptyStateSpace",
    "validate",
    "repair_constant",
    "repair_zero_rates",
    "instantiate_generator",
    "spec_from_dict",
    "spec_to_dict",
    "loads",
    "dumps",
    "load",
    "dump",
]


@dataclass(frozen=True)
class ChainSpec:
    """Finite state space with leading-order transition rates.

    ``rates[i][j]`` is the rate from state ``i`` to state ``j``; the diagonal
    is ignored and always stored as Zero.
    """

    state_labels: tuple
    rates: tuple

    def __post_init__(self):
        labels = tuple(str(s) for s in self.state_labels)
        n = len(labels)
        rows = tuple(tuple(row) for row in self.rates)
        if len(rows) != n or any(len(row) != n for row in rows):
            raise ValueError(f"rates must be a {n}x{n} matrix")
        rows = tuple(
            tuple(ZERO if i == j else rows[i][j] for j in range(n)) for i in range(n)
        )
        for row in rows:
            for q in row:
                if not isinstance(q, AsymptoticOrder):
                    raise TypeError(f"rate {q!r} is not an AsymptoticOrder")
        object.__setattr__(self, "state_labels", labels)
        object.__setattr__(self, "rates", rows)

    @property
    def N(self) -> int:
        return len(self.state_labels)

    @classmethod
    def from_rates(cls, labels: Sequence, rates: Mapping) -> "ChainSpec":
        """Build from ``{(i, j): order}`` or ``{(i, j): (alpha, beta, gamma)}``."""
        n = len(labels)
        mat = [[ZERO] * n for _ in range(n)]
        for (i, j), q in rates.items():
            if not isinstance(q, AsymptoticOrder):
                q = make(*q)
            mat[i][j] = q
        return cls(tuple(labels), tuple(tuple(r) for r in mat))

    def index(self, label) -> int:
        try:
            return self.state_labels.index(str(label))
        except ValueError:
            raise KeyError(f"unknown state label {label!r}") from None

    def nonzero_rates(self):
        """Yield ``(i, j, order)`` for every non-Zero off-diagonal rate."""
        for i, row in enumerate(self.rates):
            for j, q in enumerate(row):
                if i != j and not q.is_zero:
                    yield i, j, q


@dataclass(frozen=True)
class TimeScale:
    """Observation time ``t(eps) = c * eps**b * exp(lam/eps)``.

    Stored as an order with ``gamma = -lam``.
    """

    order: AsymptoticOrder

    def __post_init__(self):
        if self.order.is_zero:
            raise NonPositiveCoefficient("a time scale cannot be the Zero order")

    @classmethod
    def from_triple(cls, c: float, b: float, lam: float) -> "TimeScale":
        return cls(make(c, b, -lam))

    @classmethod
    def parse(cls, text: str) -> "TimeScale":
        """Parse the ``C,B,LAMBDA`` command-line form."""
        parts = text.split(",")
        if len(parts) != 3:
            raise ValueError(f"time scale {text!r} must be C,B,LAMBDA")
        c, b, lam = (float(p) for p in parts)
        return cls.from_triple(c, b, lam)

    @property
    def c(self) -> float:
        return self.order.alpha

    @property
    def b(self) -> float:
        return self.order.beta

    @property
    def lam(self) -> float:
        return -self.order.gamma + 0.0

    def to_dict(self) -> dict:
        return {"c": self.c, "b": self.b, "lambda": self.lam}

    def __call__(self, eps: float) -> float:
        return evaluate(self.order, eps)

    def __str__(self):
        return f"{self.c:g}*eps^{self.b:g}*exp({self.lam:g}/eps)"


@dataclass
class GeneratorMatrix:
    """Numeric generator at a fixed ``eps``; rows sum to zero."""

    eps: float
    entries: np.ndarray

    @property
    def N(self) -> int:
        return self.entries.shape[0]


@dataclass(frozen=True)
class ZeroRate:
    i: int
    j: int

    def __str__(self):
        return f"ZeroRate({self.i},{self.j})"


@dataclass(frozen=True)
class DuplicateLabel:
    label: str

    def __str__(self):
        return f"DuplicateLabel({self.label!r})"


@dataclass(frozen=True)
class EmptyStateSpace:
    def __str__(self):
        return "EmptyStateSpace"


def validate(spec: ChainSpec) -> list:
    """Return every violation of the positivity and labelling requirements."""
    out = []
    if spec.N == 0:
        out.append(EmptyStateSpace())
    seen = set()
    for lab in spec.state_labels:
        if lab in seen:
            out.append(DuplicateLabel(lab))
        seen.add(lab)
    for i in range(spec.N):
        for j in range(spec.N):
            if i != j and spec.rates[i][j].is_zero:
                out.append(ZeroRate(i, j))
    return out


def repair_constant(spec: ChainSpec) -> float:
    """Exponent given to repaired rates: ``10 * (1 + sum |gamma| + |beta|)``."""
    s = sum(abs(q.gamma) + abs(q.beta) for _, _, q in spec.nonzero_rates())
    return 10.0 * (1.0 + s)


def repair_zero_rates(spec: ChainSpec) -> ChainSpec:
    """Replace each Zero off-diagonal rate by ``exp(-Gamma/eps)``.

    Gamma exceeds every exponent reachable from the existing rates, so the
    repaired edges never enter a leading order.
    """
    if not any(isinstance(v, ZeroRate) for v in validate(spec)):
        return spec
    filler = make(1.0, 0.0, repair_constant(spec))
    n = spec.N
    rows = tuple(
        tuple(
            filler if (i != j and spec.rates[i][j].is_zero) else spec.rates[i][j]
            for j in range(n)
        )
        for i in range(n)
    )
    return ChainSpec(spec.state_labels, rows)


def instantiate_generator(spec: ChainSpec, eps: float) -> GeneratorMatrix:
    if not eps > 0:
        raise ValueError(f"eps={eps} must be positive")
    n = spec.N
    G = np.zeros((n, n))
    underflow = []
    for i, j, q in spec.nonzero_rates():
        v = evaluate(q, eps)
        if v == 0.0:
            underflow.append((i, j))
        G[i, j] = v
    if underflow:
        warnings.warn(
            f"rates {underflow} underflow to 0 at eps={eps}", UnderflowWarning, stacklevel=2
        )
    G[np.diag_indices(n)] = -G.sum(axis=1)
    return GeneratorMatrix(eps, G)


# -- JSON chain files --------------------------------------------------------

_RATE_KEYS = {"from", "to", "alpha", "beta", "gamma"}


def _number(value, where):
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ParseError(where, f"expected a number, got {value!r}")
    if not math.isfinite(value):
        raise ParseError(where, "number is not finite")
    return float(value)


def spec_from_dict(data) -> ChainSpec:
    """Build a spec from decoded chain-file JSON.

    Structural problems raise :class:`ParseError`; a rate with
    ``alpha <= 0`` raises :class:`NonPositiveCoefficient`.
    """
    if not isinstance(data, dict):
        raise ParseError("<root>", "expected a JSON object")
    extra = set(data) - {"states", "rates"}
    if extra:
        raise ParseError(sorted(extra)[0], "unknown field")
    if "states" not in data:
        raise ParseError("states", "missing field")
    if "rates" not in data:
        raise ParseError("rates", "missing field")
    states = data["states"]
    if not isinstance(states, list) or not all(isinstance(s, str) for s in states):
        raise ParseError("states", "expected a list of strings")
    rates = data["rates"]
    if not isinstance(rates, list):
        raise ParseError("rates", "expected a list")
    n = len(states)
    entries = {}
    for k, item in enumerate(rates):
        where = f"rates[{k}]"
        if not isinstance(item, dict):
            raise ParseError(where, "expected an object")
        extra = set(item) - _RATE_KEYS
        if extra:
            raise ParseError(f"{where}.{sorted(extra)[0]}", "unknown field")
        missing = _RATE_KEYS - set(item)
        if missing:
            raise ParseError(f"{where}.{sorted(missing)[0]}", "missing field")
        i, j = item["from"], item["to"]
        for key, v in (("from", i), ("to", j)):
            if isinstance(v, bool) or not isinstance(v, int) or not 0 <= v < n:
                raise ParseError(f"{where}.{key}", f"expected a state index in [0, {n})")
        if i == j:
            raise ParseError(where, "self-transition")
        if (i, j) in entries:
            raise ParseError(where, f"duplicate rate {i}->{j}")
        alpha = _number(item["alpha"], f"{where}.alpha")
        beta = _number(item["beta"], f"{where}.beta")
        gamma = _number(item["gamma"], f"{where}.gamma")
        try:
            entries[(i, j)] = make(alpha, beta, gamma)
        except (NonPositiveCoefficient, NonFinite) as exc:
            raise type(exc)(f"{where}: {exc}") from None
    return ChainSpec.from_rates(states, entries)


def spec_to_dict(spec: ChainSpec) -> dict:
    return {
        "states": list(spec.state_labels),
        "rates": [
            {"from": i, "to": j, "alpha": q.alpha, "beta": q.beta, "gamma": q.gamma}
            for i, j, q in spec.nonzero_rates()
        ],
    }


def loads(text: str) -> ChainSpec:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"line {exc.lineno} column {exc.colno}", exc.msg) from None
    return spec_from_dict(data)


def dumps(spec: ChainSpec) -> str:
    return json.dumps(spec_to_dict(spec), indent=2) + "\n"


def load(path) -> ChainSpec:
    return loads(Path(path).read_text(encoding="utf-8"))


def dump(spec: ChainSpec, path) -> None:
    Path(path).write_text(dumps(spec), encoding="utf-8")
