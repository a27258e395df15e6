"""Anomaly model, hypotheses, and the laws induced by linear mixing.

``n`` independent variables are observed; ``k`` of them follow the
anomalous law, the rest the common law.  A measurement ``a`` produces one
sample ``Y = sum_i a_i X_i`` from fresh realizations, so under a hypothesis
``Y`` is Gaussian with mean ``a . mu`` and variance ``a^2 . v``.

Indices are 0-based inside the package and 1-based in anything a user reads
or writes (config files, CSV, printed decisions).
"""
from __future__ import annotations

import math
import re
from dataclasses import dataclass
from itertools import combinations
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np

from .exceptions import ConfigError, DegenerateDistributionError, HypothesisSpaceTooLarge, IndistinguishableError

ENUMERATION_CAP = 10**6
LOG_2PI = math.log(2.0 * math.pi)


def _num(x: float) -> str:
    x = float(x)
    return str(int(x)) if x.is_integer() and abs(x) < 2**53 else repr(x)


@dataclass(frozen=True)
class Gaussian1D:
    """Univariate normal law; ``variance == 0`` encodes a Dirac delta at ``mean``."""

    mean: float
    variance: float

    def __post_init__(self):
        if not (math.isfinite(self.mean) and math.isfinite(self.variance)):
            raise ConfigError(f"non-finite Gaussian parameters ({self.mean}, {self.variance})")
        if self.variance < 0:
            raise ConfigError(f"variance must be >= 0, got {self.variance}")

    @property
    def is_dirac(self) -> bool:
        return self.variance == 0.0

    def __str__(self) -> str:
        if self.is_dirac:
            return f"dirac({_num(self.mean)})"
        return f"normal({_num(self.mean)},{_num(self.variance)})"


@dataclass(frozen=True)
class AnomalyModel:
    n: int
    k: int
    common: Gaussian1D
    anomalous: Gaussian1D

    def __post_init__(self):
        if self.n < 2:
            raise ConfigError(f"need n >= 2 variables, got n={self.n}")
        if not 1 <= self.k < self.n:
            raise ConfigError(f"need 1 <= k < n, got k={self.k}, n={self.n}")
        if self.common == self.anomalous:
            raise IndistinguishableError("common and anomalous laws coincide; hypotheses are indistinguishable")

    @property
    def num_hypotheses(self) -> int:
        return math.comb(self.n, self.k)

    @property
    def equal_variance(self) -> bool:
        return self.common.variance == self.anomalous.variance


@dataclass(frozen=True)
class Hypothesis:
    """A candidate anomalous set, stored as sorted 0-based indices."""

    support: tuple[int, ...]

    def __post_init__(self):
        s = tuple(int(i) for i in self.support)
        if len(s) == 0:
            raise ConfigError("hypothesis support is empty")
        if any(b <= a for a, b in zip(s, s[1:])):
            raise ConfigError(f"support must be strictly increasing, got {s}")
        if s[0] < 0:
            raise ConfigError(f"negative index in support {s}")
        object.__setattr__(self, "support", s)

    @classmethod
    def from_labels(cls, labels: Sequence[int]) -> "Hypothesis":
        """Build from 1-based indices as they appear in user-facing formats."""
        return cls(tuple(sorted(int(i) - 1 for i in labels)))

    @property
    def labels(self) -> tuple[int, ...]:
        return tuple(i + 1 for i in self.support)

    def check(self, model: AnomalyModel) -> None:
        if len(self.support) != model.k:
            raise ConfigError(f"hypothesis {self} has {len(self.support)} indices, model has k={model.k}")
        if self.support[-1] >= model.n:
            raise ConfigError(f"hypothesis {self} out of range for n={model.n}")

    def __str__(self) -> str:
        return "{" + ",".join(str(i) for i in self.labels) + "}"


@dataclass(frozen=True)
class GaussianVec:
    """Multivariate normal law (mean vector, covariance matrix)."""

    mean: np.ndarray
    covariance: np.ndarray

    def __post_init__(self):
        mu = np.asarray(self.mean, dtype=float)
        cov = np.asarray(self.covariance, dtype=float)
        if mu.ndim != 1 or cov.shape != (mu.size, mu.size):
            raise ConfigError(f"shape mismatch: mean {mu.shape}, covariance {cov.shape}")
        scale = max(float(np.abs(cov).max(initial=0.0)), 1.0)
        if not np.allclose(cov, cov.T, rtol=1e-12, atol=1e-12 * scale):
            raise ConfigError("covariance is not symmetric")
        tr = float(np.trace(cov))
        if mu.size and np.linalg.eigvalsh(cov).min() < -1e-10 * max(tr, 0.0):
            raise ConfigError("covariance is not positive semidefinite")
        mu.setflags(write=False)
        cov.setflags(write=False)
        object.__setattr__(self, "mean", mu)
        object.__setattr__(self, "covariance", cov)

    @property
    def dim(self) -> int:
        return self.mean.size

    def project(self, a) -> Gaussian1D:
        a = np.asarray(a, dtype=float)
        return Gaussian1D(float(a @ self.mean), float(max(a @ self.covariance @ a, 0.0)))


def enumerate_hypotheses(n: int, k: int, cap: int = ENUMERATION_CAP) -> list[Hypothesis]:
    """All size-``k`` supports of ``{0..n-1}`` in lexicographic order."""
    if not 1 <= k < n:
        raise ConfigError(f"need 1 <= k < n, got n={n}, k={k}")
    total = math.comb(n, k)
    if total > cap:
        raise HypothesisSpaceTooLarge(
            f"hypothesis space too large: C({n},{k}) = {total} exceeds cap {cap}"
        )
    return [Hypothesis(c) for c in combinations(range(n), k)]


def variable_parameters(model: AnomalyModel, h: Hypothesis) -> tuple[np.ndarray, np.ndarray]:
    """Per-variable (means, variances) under ``h``."""
    h.check(model)
    means = np.full(model.n, model.common.mean, dtype=float)
    variances = np.full(model.n, model.common.variance, dtype=float)
    idx = list(h.support)
    means[idx] = model.anomalous.mean
    variances[idx] = model.anomalous.variance
    return means, variances


def hypothesis_parameters(model: AnomalyModel, hypotheses: Sequence[Hypothesis]) -> tuple[np.ndarray, np.ndarray]:
    """Stacked ``(L, n)`` mean and variance tables, one row per hypothesis."""
    means = np.full((len(hypotheses), model.n), model.common.mean, dtype=float)
    variances = np.full((len(hypotheses), model.n), model.common.variance, dtype=float)
    for row, h in enumerate(hypotheses):
        h.check(model)
        idx = list(h.support)
        means[row, idx] = model.anomalous.mean
        variances[row, idx] = model.anomalous.variance
    return means, variances


def output_distribution(model: AnomalyModel, h: Hypothesis, a) -> Gaussian1D:
    """Law of ``sum_i a_i X_i`` under hypothesis ``h`` (may be a Dirac)."""
    a = np.asarray(a, dtype=float)
    if a.shape != (model.n,):
        raise ConfigError(f"measurement vector has shape {a.shape}, expected ({model.n},)")
    means, variances = variable_parameters(model, h)
    return Gaussian1D(float(a @ means), float((a * a) @ variances))


def hypothesis_law(model: AnomalyModel, h: Hypothesis) -> GaussianVec:
    means, variances = variable_parameters(model, h)
    return GaussianVec(means, np.diag(variances))


def log_density(g: Gaussian1D, y: float) -> float:
    if g.variance <= 0:
        raise DegenerateDistributionError(f"degenerate output distribution {g}: no density")
    r = y - g.mean
    return -0.5 * (LOG_2PI + math.log(g.variance) + r * r / g.variance)


# -- config parsing -------------------------------------------------------

_LITERAL = re.compile(r"^\s*(normal|dirac)\s*\(([^)]*)\)\s*$", re.IGNORECASE)


def parse_distribution(text: str) -> Gaussian1D:
    """Parse ``normal(mean,variance)`` or ``dirac(mean)``."""
    m = _LITERAL.match(text)
    if not m:
        raise ConfigError(f"unrecognised distribution literal {text!r}")
    kind = m.group(1).lower()
    try:
        args = [float(x) for x in m.group(2).split(",") if x.strip()]
    except ValueError as exc:
        raise ConfigError(f"bad number in {text!r}") from exc
    if kind == "normal":
        if len(args) != 2:
            raise ConfigError(f"normal() takes (mean, variance), got {text!r}")
        return Gaussian1D(args[0], args[1])
    if len(args) != 1:
        raise ConfigError(f"dirac() takes (mean), got {text!r}")
    return Gaussian1D(args[0], 0.0)


def parse_model_config(text: str) -> AnomalyModel:
    """Model from ``key=value`` lines (``n``, ``k``, ``common``, ``anomalous``)."""
    values: dict[str, str] = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected key=value, got {raw!r}")
        key, value = (s.strip() for s in line.split("=", 1))
        if key in values:
            raise ConfigError(f"line {lineno}: duplicate key {key!r}")
        values[key] = value
    return model_from_mapping(values)


def model_from_mapping(values: Mapping[str, str]) -> AnomalyModel:
    required = {"n", "k", "common", "anomalous"}
    missing = required - values.keys()
    if missing:
        raise ConfigError(f"model config missing keys: {sorted(missing)}")
    unknown = values.keys() - required
    if unknown:
        raise ConfigError(f"unknown model config keys: {sorted(unknown)}")
    try:
        n, k = int(values["n"]), int(values["k"])
    except ValueError as exc:
        raise ConfigError("n and k must be integers") from exc
    return AnomalyModel(n, k, parse_distribution(values["common"]), parse_distribution(values["anomalous"]))


def read_model_config(path) -> AnomalyModel:
    path = Path(path)
    if not path.is_file():
        raise ConfigError(f"model config not found: {path}")
    return parse_model_config(path.read_text())


def format_model_config(model: AnomalyModel) -> str:
    return f"n={model.n}\nk={model.k}\ncommon={model.common}\nanomalous={model.anomalous}\n"
