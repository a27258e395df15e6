"""Measurement vectors, schedules and ensembles.

A schedule is an ``(m, n)`` coefficient matrix; row ``j`` mixes the ``j``-th
fresh realization of the ``n`` variables.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from itertools import permutations
from pathlib import Path
from typing import NamedTuple

import numpy as np
from scipy import linalg

from .chernoff import (
    Ensemble,
    chernoff_equal_variance,
    chernoff_gaussian,
    chernoff_zero_mean,
    zero_mean_lambda,
)
from .exceptions import ConfigError, ScopeError
from .gaussmodels import AnomalyModel, Gaussian1D, enumerate_hypotheses, hypothesis_parameters

PERMUTATION_CAP_N = 8


def measurement_vector(coefficients) -> np.ndarray:
    a = np.array(coefficients, dtype=float)
    if a.ndim != 1 or a.size == 0:
        raise ConfigError(f"measurement vector must be 1-D and non-empty, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ConfigError("measurement vector has non-finite entries")
    if not np.any(a):
        raise ConfigError("measurement vector is all zeros")
    return a


def normalize_direction(a) -> np.ndarray:
    """Unit norm, first nonzero entry positive."""
    a = np.asarray(a, dtype=float)
    a = a / np.linalg.norm(a)
    nz = np.flatnonzero(np.abs(a) > 1e-12)
    if nz.size and a[nz[0]] < 0:
        a = -a
    return a


@dataclass(frozen=True)
class Schedule:
    """Ordered measurement rows, shape ``(m, n)``."""

    rows: np.ndarray
    metadata: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        rows = np.array(self.rows, dtype=float)
        if rows.ndim == 1:
            rows = rows[None, :]
        if rows.ndim != 2 or rows.shape[1] == 0:
            raise ConfigError(f"schedule rows must be 2-D with n >= 1, got shape {rows.shape}")
        if not np.all(np.isfinite(rows)):
            raise ConfigError("schedule has non-finite coefficients")
        rows.setflags(write=False)
        object.__setattr__(self, "rows", rows)

    @property
    def m(self) -> int:
        return self.rows.shape[0]

    @property
    def n(self) -> int:
        return self.rows.shape[1]

    def __len__(self) -> int:
        return self.m

    def __array__(self, dtype=None, copy=None):
        return self.rows if dtype is None else self.rows.astype(dtype)

    def __eq__(self, other):
        return isinstance(other, Schedule) and np.array_equal(self.rows, other.rows)

    __hash__ = None


# -- schedule file format -------------------------------------------------

def _fmt(x: float) -> str:
    if float(x).is_integer() and abs(x) < 2**53:
        return str(int(x))
    return repr(float(x))


def format_schedule(schedule) -> str:
    rows = np.asarray(getattr(schedule, "rows", schedule), dtype=float)
    lines = [f"{rows.shape[0]} {rows.shape[1]}"]
    lines += [" ".join(_fmt(x) for x in r) for r in rows]
    return "\n".join(lines) + "\n"


def parse_schedule(text: str) -> Schedule:
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if not lines:
        raise ConfigError("empty schedule file")
    try:
        m, n = (int(t) for t in lines[0].split())
    except ValueError as exc:
        raise ConfigError(f"schedule header must be 'm n', got {lines[0]!r}") from exc
    body = lines[1:]
    if len(body) != m:
        raise ConfigError(f"schedule header says m={m} but {len(body)} rows follow")
    try:
        rows = [[float(t) for t in ln.split()] for ln in body]
    except ValueError as exc:
        raise ConfigError("non-numeric schedule coefficient") from exc
    if any(len(r) != n for r in rows):
        raise ConfigError(f"every schedule row must have n={n} entries")
    return Schedule(np.array(rows, dtype=float).reshape(m, n))


def write_schedule(schedule, path) -> None:
    Path(path).write_text(format_schedule(schedule))


def read_schedule(path) -> Schedule:
    path = Path(path)
    if not path.is_file():
        raise ConfigError(f"schedule file not found: {path}")
    return parse_schedule(path.read_text())


# -- constructions --------------------------------------------------------

def separate_design(n: int, m: int, seed=None) -> Schedule:
    """``m // n`` passes over the identity, then ``m % n`` extra unit rows on random distinct indices."""
    if m < 1:
        raise ConfigError(f"need m >= 1, got {m}")
    eye = np.eye(n)
    reps, extra = divmod(m, n)
    parts = [eye] * reps
    if extra:
        rng = np.random.default_rng(seed)
        parts.append(eye[np.sort(rng.choice(n, size=extra, replace=False))])
    return Schedule(np.vstack(parts), {"design": "separate", "extra_rows": extra})


@dataclass(frozen=True)
class BipartiteDesignSpec:
    """Sparse 0/1 mixing from a configuration-model bipartite graph.

    ``d`` edges leave every measurement node.  With ``strict`` the variable
    degrees must all equal ``d*m/n``; otherwise the ``d*m`` sockets are
    spread as evenly as possible and the variables receiving the extra
    socket are drawn at random.
    """

    n: int
    m: int
    d: int = 6
    seed: int | None = None
    strict: bool = True

    def __post_init__(self):
        if self.n < 1 or self.m < 1 or self.d < 1:
            raise ConfigError(f"need positive n, m, d; got {self.n}, {self.m}, {self.d}")
        if self.d > self.n:
            raise ConfigError(f"right degree d={self.d} exceeds n={self.n}")
        if self.strict and (self.d * self.m) % self.n:
            raise ConfigError(
                f"d*m = {self.d * self.m} is not divisible by n = {self.n}; "
                "variable degrees would be unequal"
            )

    @property
    def left_degree(self) -> float:
        return self.d * self.m / self.n


def bipartite_design(spec: BipartiteDesignSpec) -> Schedule:
    rng = np.random.default_rng(spec.seed)
    total = spec.d * spec.m
    base, extra = divmod(total, spec.n)
    degrees = np.full(spec.n, base)
    if extra:
        degrees[rng.choice(spec.n, size=extra, replace=False)] += 1
    sockets = np.repeat(np.arange(spec.n), degrees)
    rng.shuffle(sockets)
    edges = sockets.reshape(spec.m, spec.d)
    rows = np.zeros((spec.m, spec.n))
    rows[np.arange(spec.m)[:, None], edges] = 1.0
    collapsed = int(total - rows.sum())
    meta = {
        "design": "bipartite",
        "right_degree": spec.d,
        "left_degree": spec.left_degree,
        "collapsed_edges": collapsed,
    }
    return Schedule(rows, meta)


def hamming74_design() -> Schedule:
    """Parity-check matrix of the (7,4) Hamming code; column ``c`` is ``c`` in binary."""
    cols = np.arange(1, 8)
    rows = np.array([(cols >> b) & 1 for b in range(3)], dtype=float)
    return Schedule(rows, {"design": "hamming74"})


def separates_all_pairs(schedule) -> bool:
    """True if every pair of columns is split by some row (exactly one of the two is nonzero)."""
    nz = np.asarray(getattr(schedule, "rows", schedule)) != 0
    n = nz.shape[1]
    return all(np.any(nz[:, i] != nz[:, j]) for i in range(n) for j in range(i + 1, n))


# -- optimal designs for two Gaussian laws --------------------------------

class MeanShiftDesign(NamedTuple):
    a: np.ndarray
    exponent: float


class VarianceDesign(NamedTuple):
    a: np.ndarray
    B: float
    lambda_star: float
    exponent: float


def _cholesky(sigma, name="sigma"):
    sigma = np.asarray(sigma, dtype=float)
    if sigma.ndim != 2 or sigma.shape[0] != sigma.shape[1]:
        raise ConfigError(f"{name} must be square, got shape {sigma.shape}")
    if not np.allclose(sigma, sigma.T, rtol=1e-12, atol=1e-12):
        raise ConfigError(f"{name} is not symmetric")
    try:
        return linalg.cho_factor(sigma)
    except linalg.LinAlgError as exc:
        raise ConfigError(f"{name} is not positive definite") from exc


def optimal_mean_shift(mu1, mu2, sigma) -> MeanShiftDesign:
    """Best single projection for ``N(mu1, S)`` vs ``N(mu2, S)``.

    ``a = S^{-1}(mu1 - mu2)``, exponent ``(mu1-mu2)' S^{-1} (mu1-mu2) / 8``.
    """
    delta = np.asarray(mu1, dtype=float) - np.asarray(mu2, dtype=float)
    cf = _cholesky(sigma)
    if delta.shape != (cf[0].shape[0],):
        raise ConfigError("mean vectors do not match covariance dimension")
    if not np.any(delta):
        raise ScopeError("no mean separation: mu1 == mu2")
    a = linalg.cho_solve(cf, delta)
    return MeanShiftDesign(a, float(delta @ a) / 8.0)


def optimal_variance_discrimination(sigma1, sigma2) -> VarianceDesign:
    """Best single projection for ``N(mu, S1)`` vs ``N(mu, S2)``.

    The exponent grows with the projected variance ratio, so the best
    direction maximizes ``a'S1a / a'S2a`` or its reciprocal: the extreme
    generalized eigenpairs of ``(S1, S2)``.  ``lambda_star`` is the
    exponent on the larger-variance projected law.
    """
    _cholesky(sigma1, "sigma1")
    _cholesky(sigma2, "sigma2")
    w, v = linalg.eigh(sigma1, sigma2)
    top, bottom = float(w[-1]), float(w[0])
    if top >= 1.0 / bottom:
        B, a = top, v[:, -1]
    else:
        B, a = 1.0 / bottom, v[:, 0]
    B = max(B, 1.0)
    a = normalize_direction(a)
    return VarianceDesign(a, B, zero_mean_lambda(B), chernoff_zero_mean(B))


# -- permutation ensembles and the optimal base vector --------------------

def permutation_ensemble(base, cap_n: int = PERMUTATION_CAP_N) -> Ensemble:
    """Uniform mixture over all coordinate permutations of ``base``; repeats merged."""
    base = measurement_vector(base)
    n = base.size
    if n > cap_n:
        raise ConfigError(
            f"n={n} gives {math.factorial(n)} permutations (cap n <= {cap_n}); "
            "use cyclic_ensemble for a cheaper symmetric family"
        )
    counts: dict[tuple[float, ...], int] = {}
    for p in permutations(base.tolist()):
        counts[p] = counts.get(p, 0) + 1
    atoms = np.array(list(counts), dtype=float)
    w = np.array(list(counts.values()), dtype=float)
    return Ensemble(atoms, w / w.sum())


def cyclic_ensemble(base) -> Ensemble:
    """Uniform mixture over the ``n`` cyclic shifts of ``base``; repeats merged."""
    base = measurement_vector(base)
    return Ensemble.from_rows(np.array([np.roll(base, s) for s in range(base.size)]))


def pairwise_chernoff_sum(model: AnomalyModel, a, hypotheses=None) -> float:
    """Sum over unordered hypothesis pairs of the Chernoff information under vector ``a``."""
    hyps = hypotheses if hypotheses is not None else enumerate_hypotheses(model.n, model.k)
    a = np.asarray(a, dtype=float)
    means, variances = hypothesis_parameters(model, hyps)
    mu, var = means @ a, variances @ (a * a)
    total = 0.0
    L = len(hyps)
    for i in range(L):
        for j in range(i + 1, L):
            if mu[i] == mu[j] and var[i] == var[j]:
                continue
            if var[i] == var[j]:
                total += chernoff_equal_variance(mu[i], mu[j], var[i])
            else:
                total += chernoff_gaussian(Gaussian1D(mu[i], var[i]), Gaussian1D(mu[j], var[j])).value
    return total


class BaseVectorResult(NamedTuple):
    a: np.ndarray
    objective: float


def optimize_base_vector(model: AnomalyModel, seed=0, restarts: int = 20,
                         step_tol: float = 1e-6) -> BaseVectorResult:
    """Unit vector maximizing the pairwise Chernoff sum, by pattern search on the sphere.

    Only defined for one anomaly among equal-variance Gaussians.  Each of
    ``restarts`` random starts polls ``+-step`` along every coordinate,
    re-normalizes, and halves the step when no poll improves; the best
    result wins, earlier restarts winning ties.
    """
    if model.k != 1 or not model.equal_variance:
        raise ScopeError("outside the symmetric-ensemble scope: needs k=1 and equal variances")
    if model.common.variance <= 0:
        raise ScopeError("outside the symmetric-ensemble scope: zero-variance laws")
    hyps = enumerate_hypotheses(model.n, model.k)
    n = model.n
    rng = np.random.default_rng(seed)

    def objective(x):
        return pairwise_chernoff_sum(model, x, hyps)

    best_a, best_f = None, -math.inf
    for _ in range(restarts):
        x = rng.standard_normal(n)
        x /= np.linalg.norm(x)
        fx = objective(x)
        step = 0.5
        while step >= step_tol:
            improved = False
            for i in range(n):
                for sgn in (1.0, -1.0):
                    y = x.copy()
                    y[i] += sgn * step
                    norm = np.linalg.norm(y)
                    if norm == 0:
                        continue
                    y /= norm
                    fy = objective(y)
                    if fy > fx:
                        x, fx, improved = y, fy, True
            if not improved:
                step *= 0.5
        if fx > best_f:
            best_a, best_f = x, fx
    a = normalize_direction(best_a)
    return BaseVectorResult(a, objective(a))
