"""Error exponents for pairs of Gaussian observation laws.

Everything here is in nats.  The basic object is the log-affinity

    log A(lam) = log  integral  g1(x)^lam g2(x)^(1-lam) dx,

which for Gaussians has a closed form, is convex in ``lam`` and vanishes at
both ends of ``[0, 1]``.  Chernoff information is ``-min_lam log A``.  For a
finitely supported ensemble of measurement vectors there are two ways to
average over the atoms:

* inner: ``-min_lam log E_A[A_t(lam)]``  (random time-varying measurements)
* outer: ``-min_lam E_A[log A_t(lam)]``  (deterministic time-varying schedules)

and ``holder <= inner <= outer <= E_A[C_t]``.
"""
from __future__ import annotations

import io
import math
from dataclasses import dataclass, field
from typing import NamedTuple, Sequence

import numpy as np
from scipy import optimize

from .exceptions import ConfigError, DegenerateDistributionError, IndistinguishableError, NumericalError
from .gaussmodels import (
    AnomalyModel,
    Gaussian1D,
    Hypothesis,
    enumerate_hypotheses,
    hypothesis_parameters,
    variable_parameters,
)

LAMBDA_TOL = 1e-10


class ChernoffResult(NamedTuple):
    value: float
    lambda_star: float


class KLBalance(NamedTuple):
    lambda_star: float
    value: float


# -- closed forms ---------------------------------------------------------

def _log_affinity(m1, v1, m2, v2, lam):
    # exponent lam sits on the first law: v_lam = lam*v2 + (1-lam)*v1
    v_lam = lam * v2 + (1.0 - lam) * v1
    d = m1 - m2
    return (-lam * (1.0 - lam) * d * d / (2.0 * v_lam)
            - 0.5 * (np.log(v_lam) - (1.0 - lam) * np.log(v1) - lam * np.log(v2)))


def _log_affinity_grad(m1, v1, m2, v2, lam):
    dv = v2 - v1
    v_lam = v1 + lam * dv
    d2 = (m1 - m2) ** 2
    mean_part = -0.5 * d2 * ((1.0 - 2.0 * lam) * v_lam - lam * (1.0 - lam) * dv) / (v_lam * v_lam)
    var_part = -0.5 * dv / v_lam + 0.5 * (np.log(v2) - np.log(v1))
    return mean_part + var_part


def _require_density(*gs: Gaussian1D) -> None:
    for g in gs:
        if g.variance <= 0:
            raise DegenerateDistributionError(f"degenerate output distribution {g}")


def _check_lambda(lam: float) -> None:
    if not 0.0 <= lam <= 1.0:
        raise ValueError(f"lambda must lie in [0, 1], got {lam}")


def log_affinity(g1: Gaussian1D, g2: Gaussian1D, lam: float) -> float:
    """``log integral g1^lam g2^(1-lam)``; always <= 0."""
    _check_lambda(lam)
    _require_density(g1, g2)
    if lam == 0.0 or lam == 1.0:
        return 0.0
    return float(min(_log_affinity(g1.mean, g1.variance, g2.mean, g2.variance, lam), 0.0))


def tilted_gaussian(g1: Gaussian1D, g2: Gaussian1D, lam: float) -> Gaussian1D:
    """Normalized ``g1^lam g2^(1-lam)``, which is again Gaussian."""
    _check_lambda(lam)
    if lam == 1.0:
        return g1
    if lam == 0.0:
        return g2
    _require_density(g1, g2)
    precision = lam / g1.variance + (1.0 - lam) / g2.variance
    if not precision > 0:
        raise DegenerateDistributionError(f"nonpositive tilted precision {precision}")
    var = 1.0 / precision
    return Gaussian1D(var * (lam * g1.mean / g1.variance + (1.0 - lam) * g2.mean / g2.variance), var)


def kl_gaussian(p: Gaussian1D, q: Gaussian1D) -> float:
    """D(p || q) for univariate normals."""
    _require_density(p, q)
    d = p.mean - q.mean
    r = p.variance / q.variance
    return 0.5 * (r + d * d / q.variance - 1.0 - math.log(r))


def chernoff_equal_variance(mean_a: float, mean_b: float, variance: float) -> float:
    if not variance > 0:
        raise DegenerateDistributionError(f"variance must be positive, got {variance}")
    return (mean_a - mean_b) ** 2 / (8.0 * variance)


def zero_mean_lambda(ratio: float) -> float:
    """Optimal exponent on the larger-variance law for a zero-mean pair.

    ``ratio`` is the variance ratio ``B >= 1``; the pair ``(N(0, B), N(0, 1))``
    has ``lambda* = (B log B - (B - 1)) / ((B - 1) log B)``.
    """
    if ratio < 1:
        raise ValueError(f"variance ratio must be >= 1, got {ratio}")
    if ratio - 1.0 < 1e-6:
        # series around B = 1: 1/2 + (B-1)/12 + O((B-1)^2)
        return 0.5 + (ratio - 1.0) / 12.0
    lb = math.log(ratio)
    return (ratio * lb - (ratio - 1.0)) / ((ratio - 1.0) * lb)


def chernoff_zero_mean(ratio: float) -> float:
    """Chernoff information between ``N(mu, B v)`` and ``N(mu, v)``.

    Equals ``1/2 [log((B-1)/log B) - 1 + log(B)/(B-1)]``, which is
    increasing in ``B`` and zero at ``B = 1``.
    """
    if ratio < 1:
        raise ValueError(f"variance ratio must be >= 1, got {ratio}")
    if ratio - 1.0 < 1e-6:
        x = ratio - 1.0
        return x * x / 16.0
    lb = math.log(ratio)
    return 0.5 * (math.log((ratio - 1.0) / lb) - 1.0 + lb / (ratio - 1.0))


# -- scalar search --------------------------------------------------------

def _argmin_convex(df, tol: float = LAMBDA_TOL) -> float:
    """Minimizer on ``[0, 1]`` of a convex function with derivative ``df``.

    The derivative is nondecreasing, so the minimizer is an endpoint or the
    unique sign change of ``df``, found by Brent's method to ``tol``.
    """
    lo, hi = df(0.0), df(1.0)
    if lo >= 0:
        return 0.0
    if hi <= 0:
        return 1.0
    try:
        return float(optimize.brentq(df, 0.0, 1.0, xtol=tol, maxiter=200))
    except RuntimeError as exc:
        raise NumericalError(f"lambda search did not converge: {exc}") from exc


def chernoff_gaussian(g1: Gaussian1D, g2: Gaussian1D) -> ChernoffResult:
    """Chernoff information of two normals and the maximizing exponent on ``g1``."""
    _require_density(g1, g2)
    if g1 == g2:
        return ChernoffResult(0.0, 0.5)
    args = (g1.mean, g1.variance, g2.mean, g2.variance)
    lam = _argmin_convex(lambda t: float(_log_affinity_grad(*args, t)))
    return ChernoffResult(max(-float(_log_affinity(*args, lam)), 0.0), lam)


# -- ensembles ------------------------------------------------------------

@dataclass(frozen=True)
class Ensemble:
    """Finitely supported distribution over measurement vectors."""

    atoms: np.ndarray
    weights: np.ndarray

    def __post_init__(self):
        atoms = np.array(self.atoms, dtype=float, ndmin=2)
        w = np.array(self.weights, dtype=float, ndmin=1)
        if atoms.ndim != 2 or atoms.shape[0] == 0:
            raise ConfigError("ensemble needs at least one atom")
        if w.shape != (atoms.shape[0],):
            raise ConfigError(f"{atoms.shape[0]} atoms but {w.size} weights")
        if not np.all(np.isfinite(atoms)) or not np.all(np.isfinite(w)):
            raise ConfigError("ensemble has non-finite entries")
        if np.any(w < 0):
            raise ConfigError("ensemble weights must be nonnegative")
        if abs(w.sum() - 1.0) > 1e-12:
            raise ConfigError(f"ensemble weights sum to {w.sum()!r}, not 1")
        atoms.setflags(write=False)
        w.setflags(write=False)
        object.__setattr__(self, "atoms", atoms)
        object.__setattr__(self, "weights", w)

    @property
    def n(self) -> int:
        return self.atoms.shape[1]

    def __len__(self) -> int:
        return self.atoms.shape[0]

    @classmethod
    def single(cls, a) -> "Ensemble":
        return cls(np.asarray(a, dtype=float)[None, :], np.ones(1))

    @classmethod
    def from_rows(cls, rows) -> "Ensemble":
        """Empirical distribution of schedule rows; duplicates merge in order of first use."""
        rows = np.asarray(getattr(rows, "rows", rows), dtype=float)
        if rows.ndim != 2 or rows.shape[0] == 0:
            raise ConfigError("need a non-empty 2-D array of rows")
        counts: dict[bytes, int] = {}
        order: list[np.ndarray] = []
        for r in rows:
            key = r.tobytes()
            if key not in counts:
                counts[key] = 0
                order.append(r)
            counts[key] += 1
        c = np.array([counts[r.tobytes()] for r in order], dtype=float)
        return cls(np.array(order), c / c.sum())

    def as_mapping(self) -> dict[tuple[float, ...], float]:
        out: dict[tuple[float, ...], float] = {}
        for a, w in zip(self.atoms, self.weights):
            key = tuple(a.tolist())
            out[key] = out.get(key, 0.0) + float(w)
        return out


@dataclass
class _PairAtoms:
    m1: np.ndarray
    v1: np.ndarray
    m2: np.ndarray
    v2: np.ndarray
    w: np.ndarray
    index: np.ndarray       # original atom index of each informative atom
    w_identical: float      # weight of atoms with identical laws under both hypotheses


def _pair_atoms(ens: Ensemble, model: AnomalyModel, hi: Hypothesis, hj: Hypothesis) -> _PairAtoms:
    if ens.n != model.n:
        raise ConfigError(f"ensemble dimension {ens.n} != model n {model.n}")
    mi, vi = variable_parameters(model, hi)
    mj, vj = variable_parameters(model, hj)
    sq = ens.atoms * ens.atoms
    m1, v1 = ens.atoms @ mi, sq @ vi
    m2, v2 = ens.atoms @ mj, sq @ vj
    same = (m1 == m2) & (v1 == v2)
    bad = ~same & ((v1 <= 0) | (v2 <= 0))
    if bad.any():
        t = int(np.flatnonzero(bad)[0])
        raise DegenerateDistributionError(
            f"atom {t + 1} gives a degenerate output law for pair {hi} vs {hj} "
            f"(variances {v1[t]:g}, {v2[t]:g})"
        )
    keep = ~same & (ens.weights > 0)
    return _PairAtoms(m1[keep], v1[keep], m2[keep], v2[keep], ens.weights[keep],
                      np.flatnonzero(keep), float(ens.weights[same].sum()))


def outer_chernoff(ens: Ensemble, model: AnomalyModel, hi: Hypothesis, hj: Hypothesis) -> ChernoffResult:
    p = _pair_atoms(ens, model, hi, hj)
    if p.w.size == 0:
        return ChernoffResult(0.0, 0.5)
    args = (p.m1, p.v1, p.m2, p.v2)
    lam = _argmin_convex(lambda t: float(p.w @ _log_affinity_grad(*args, t)))
    return ChernoffResult(max(-float(p.w @ _log_affinity(*args, lam)), 0.0), lam)


def inner_chernoff(ens: Ensemble, model: AnomalyModel, hi: Hypothesis, hj: Hypothesis) -> ChernoffResult:
    p = _pair_atoms(ens, model, hi, hj)
    if p.w.size == 0:
        return ChernoffResult(0.0, 0.5)
    args = (p.m1, p.v1, p.m2, p.v2)

    def f(t):
        return math.log(p.w_identical + float(p.w @ np.exp(_log_affinity(*args, t))))

    def df(t):
        e = p.w * np.exp(_log_affinity(*args, t))
        return float(e @ _log_affinity_grad(*args, t)) / (p.w_identical + float(e.sum()))

    lam = _argmin_convex(df)
    return ChernoffResult(max(-f(lam), 0.0), lam)


def expected_chernoff(ens: Ensemble, model: AnomalyModel, hi: Hypothesis, hj: Hypothesis) -> float:
    """Atom-weighted average of plain Chernoff information (upper bound on the outer value)."""
    p = _pair_atoms(ens, model, hi, hj)
    return float(sum(w * chernoff_gaussian(Gaussian1D(a, b), Gaussian1D(c, d)).value
                     for a, b, c, d, w in zip(p.m1, p.v1, p.m2, p.v2, p.w)))


def holder_lower_bound(ens: Ensemble, model: AnomalyModel, hi: Hypothesis, hj: Hypothesis) -> float:
    """Best single-atom bound ``-log(1 - w + w exp(-C))`` on the inner value."""
    p = _pair_atoms(ens, model, hi, hj)
    best = 0.0
    for a, b, c, d, w in zip(p.m1, p.v1, p.m2, p.v2, p.w):
        cval = chernoff_gaussian(Gaussian1D(a, b), Gaussian1D(c, d)).value
        best = max(best, -math.log1p(w * math.expm1(-cval)))
    return best


def oc_via_kl_balance(ens: Ensemble, model: AnomalyModel, hi: Hypothesis, hj: Hypothesis) -> KLBalance:
    """Outer value found by equalizing the two tilted-law KL averages.

    ``Q_ij(lam) = E_A D(P_lam || P_i)`` falls and ``Q_ji(lam)`` rises in
    ``lam``; the root of their difference gives the balancing ``lam``.
    """
    p = _pair_atoms(ens, model, hi, hj)
    if p.w.size == 0:
        return KLBalance(0.5, 0.0)
    laws = [(Gaussian1D(a, b), Gaussian1D(c, d)) for a, b, c, d in zip(p.m1, p.v1, p.m2, p.v2)]

    def q(lam):
        qij = qji = 0.0
        for w, (gi, gj) in zip(p.w, laws):
            t = tilted_gaussian(gi, gj, lam)
            qij += w * kl_gaussian(t, gi)
            qji += w * kl_gaussian(t, gj)
        return qij, qji

    def gap(lam):
        qij, qji = q(lam)
        return qij - qji

    if gap(0.0) <= 0:
        lam = 0.0
    elif gap(1.0) >= 0:
        lam = 1.0
    else:
        lam = float(optimize.brentq(gap, 0.0, 1.0, xtol=LAMBDA_TOL, maxiter=200))
    qij, qji = q(lam)
    return KLBalance(lam, 0.5 * (qij + qji))


# -- all pairs ------------------------------------------------------------

@dataclass
class ExponentReport:
    hypotheses: list[Hypothesis]
    pairwise: np.ndarray
    lambdas: np.ndarray
    min_exponent: float
    argmin_pair: tuple[int, int]          # 0-based hypothesis indices
    regime: str = "deterministic"
    extra: dict = field(default_factory=dict)

    def summary(self) -> str:
        i, j = self.argmin_pair
        return f"E={self.min_exponent!r} pair=({i + 1},{j + 1})"

    def to_csv(self, fh=None) -> str:
        buf = io.StringIO()
        buf.write("i,j,exponent_nats,lambda_star\n")
        L = len(self.hypotheses)
        for i in range(L):
            for j in range(i + 1, L):
                buf.write(f"{i + 1},{j + 1},{float(self.pairwise[i, j])!r},{float(self.lambdas[i, j])!r}\n")
        text = buf.getvalue()
        if fh is not None:
            fh.write(text)
        return text


def min_pairwise_exponent(design, model: AnomalyModel,
                          hypotheses: Sequence[Hypothesis] | None = None) -> ExponentReport:
    """Pairwise exponent table and its minimum over all hypothesis pairs.

    ``design`` may be a single measurement vector (time-invariant
    observations, plain Chernoff information), a schedule or 2-D array of
    rows (deterministic time-varying, outer value over the empirical row
    distribution), or an :class:`Ensemble` (outer value).
    """
    hyps = list(hypotheses) if hypotheses is not None else enumerate_hypotheses(model.n, model.k)
    L = len(hyps)
    if L < 2:
        raise ConfigError("need at least two hypotheses")
    fixed = None
    if isinstance(design, Ensemble):
        ens, regime = design, "deterministic"
    else:
        arr = np.asarray(getattr(design, "rows", design), dtype=float)
        if arr.ndim == 1:
            fixed, regime, ens = arr, "fixed", None
        else:
            ens, regime = Ensemble.from_rows(arr), "deterministic"

    pairwise = np.zeros((L, L))
    lambdas = np.full((L, L), 0.5)
    if fixed is not None:
        if fixed.shape != (model.n,):
            raise ConfigError(f"measurement vector has shape {fixed.shape}, expected ({model.n},)")
        means, variances = hypothesis_parameters(model, hyps)
        mu, var = means @ fixed, variances @ (fixed * fixed)
    for i in range(L):
        for j in range(i + 1, L):
            if fixed is not None:
                g1, g2 = Gaussian1D(float(mu[i]), float(var[i])), Gaussian1D(float(mu[j]), float(var[j]))
                if g1 == g2:
                    res = ChernoffResult(0.0, 0.5)
                else:
                    try:
                        res = chernoff_gaussian(g1, g2)
                    except DegenerateDistributionError as exc:
                        raise DegenerateDistributionError(f"pair {hyps[i]} vs {hyps[j]}: {exc}") from exc
            else:
                try:
                    res = outer_chernoff(ens, model, hyps[i], hyps[j])
                except DegenerateDistributionError as exc:
                    raise DegenerateDistributionError(f"pair {hyps[i]} vs {hyps[j]}: {exc}") from exc
            pairwise[i, j] = pairwise[j, i] = res.value
            lambdas[i, j], lambdas[j, i] = res.lambda_star, 1.0 - res.lambda_star
    iu = np.triu_indices(L, 1)
    flat = int(np.argmin(pairwise[iu]))
    pair = (int(iu[0][flat]), int(iu[1][flat]))
    return ExponentReport(hyps, pairwise, lambdas, float(pairwise[pair]), pair, regime)


def sample_complexity(exponent: float, n: int, k: int, target_error: float) -> int:
    """Measurements for which the union bound ``L exp(-m E)`` drops to ``target_error``.

    An order-of-magnitude predictor, not a guarantee.
    """
    if not exponent > 0:
        raise IndistinguishableError(f"indistinguishable hypotheses: exponent {exponent}")
    if not 0 < target_error <= 1:
        raise ValueError(f"target_error must lie in (0, 1], got {target_error}")
    L = math.comb(n, k)
    m = (math.log(L) - math.log(target_error)) / exponent
    return max(0, math.ceil(m - 1e-9 * max(1.0, m)))
