"""Likelihood-ratio and pairwise Neyman-Pearson detectors.

Whether the measurement rows were fixed, drawn at random, or scheduled in
advance, they are known at decision time and the factor ``P(A)`` is common
to every hypothesis, so one conditional-likelihood scorer serves all three
regimes.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from .chernoff import Ensemble
from .design import Schedule
from .exceptions import ConfigError, DegenerateDistributionError
from .gaussmodels import LOG_2PI, AnomalyModel, Hypothesis, hypothesis_parameters


def as_rows(schedule, n: int | None = None) -> np.ndarray:
    """Coefficient matrix of a schedule; an empty ``(0, n)`` array is allowed."""
    rows = np.asarray(getattr(schedule, "rows", schedule), dtype=float)
    if rows.size == 0:
        rows = rows.reshape(0, n if n is not None else (rows.shape[-1] if rows.ndim == 2 else 0))
    if rows.ndim == 1:
        rows = rows[None, :]
    if n is not None and rows.shape[1] != n:
        raise ConfigError(f"schedule has {rows.shape[1]} columns, model has n={n}")
    return rows


def _as_obs(obs, m: int) -> np.ndarray:
    y = np.asarray(obs, dtype=float).reshape(-1)
    if y.size != m:
        raise ConfigError(f"{y.size} observations for a schedule of {m} rows")
    if not np.all(np.isfinite(y)):
        raise ConfigError("observations must be finite")
    return y


def log_likelihoods(model: AnomalyModel, hypotheses: Sequence[Hypothesis], schedule, obs) -> np.ndarray:
    """Log-likelihood of ``obs`` under every hypothesis, shape ``(L,)``."""
    rows = as_rows(schedule, model.n)
    y = _as_obs(obs, rows.shape[0])
    means, variances = hypothesis_parameters(model, hypotheses)
    mu = means @ rows.T
    var = variances @ (rows * rows).T
    if var.size and var.min() <= 0:
        h, j = np.unravel_index(int(np.argmin(var)), var.shape)
        raise DegenerateDistributionError(
            f"degenerate output law at row {j + 1} under hypothesis {hypotheses[h]}"
        )
    r = y[None, :] - mu
    return -0.5 * (LOG_2PI * rows.shape[0] + np.log(var).sum(axis=1) + (r * r / var).sum(axis=1))


def log_likelihood(model: AnomalyModel, h: Hypothesis, schedule, obs) -> float:
    return float(log_likelihoods(model, [h], schedule, obs)[0])


@dataclass(frozen=True)
class Decision:
    """Detector outcome: ``index`` into the hypothesis list, or ``None`` for failure."""

    index: int | None
    hypothesis: Hypothesis | None = None

    @property
    def failed(self) -> bool:
        return self.index is None

    def __str__(self) -> str:
        if self.hypothesis is None:
            return "FAILURE"
        return "SELECTED " + " ".join(str(i) for i in self.hypothesis.labels)


FAILURE = Decision(None)


@dataclass(frozen=True)
class NPConfig:
    """Pairwise test settings.

    For a pair ``i < j`` the lower-indexed hypothesis wins when its
    log-likelihood exceeds the other's by more than ``log_threshold``, the
    higher-indexed one wins when the margin is below it, and an exact hit
    is a win for neither.  ``tie_rule`` picks among several unbeaten
    hypotheses, which only a nonzero threshold can produce.
    """

    log_threshold: float = 0.0
    tie_rule: str = "lowest-index"

    def __post_init__(self):
        if not math.isfinite(self.log_threshold):
            raise ConfigError("log_threshold must be finite")
        if self.tie_rule != "lowest-index":
            raise ConfigError(f"unsupported tie rule {self.tie_rule!r}")


def _select(scores: np.ndarray, hypotheses: Sequence[Hypothesis]) -> Decision:
    i = int(np.argmax(scores))  # first maximum = lowest index
    return Decision(i, hypotheses[i])


def lrt(model: AnomalyModel, schedule, obs, hypotheses: Sequence[Hypothesis]) -> Decision:
    """Maximum-likelihood choice over ``hypotheses``; ties go to the lowest index."""
    if not hypotheses:
        raise ConfigError("empty hypothesis list")
    return _select(log_likelihoods(model, hypotheses, schedule, obs), hypotheses)


def pairwise_wins(scores: np.ndarray, log_threshold: float = 0.0) -> np.ndarray:
    """``W[i, j]`` is True when hypothesis ``i`` beats ``j`` in their pairwise test."""
    d = scores[:, None] - scores[None, :]
    L = scores.size
    upper = np.triu(np.ones((L, L), dtype=bool), 1)
    return np.where(upper, d > log_threshold, d > -log_threshold) & ~np.eye(L, dtype=bool)


def pairwise_np(model: AnomalyModel, schedule, obs, hypotheses: Sequence[Hypothesis],
                cfg: NPConfig = NPConfig()) -> Decision:
    """Select the hypothesis that wins every pairwise test it takes part in, else fail."""
    if not hypotheses:
        raise ConfigError("empty hypothesis list")
    scores = log_likelihoods(model, hypotheses, schedule, obs)
    L = len(hypotheses)
    if L == 1:
        return Decision(0, hypotheses[0])
    wins = pairwise_wins(scores, cfg.log_threshold)
    unbeaten = np.flatnonzero(wins.sum(axis=1) == L - 1)
    if unbeaten.size == 0:
        return FAILURE
    i = int(unbeaten[0])
    return Decision(i, hypotheses[i])


DETECTORS = {"lrt": lrt, "pairwise_np": pairwise_np}


def decide(detector: str, model, schedule, obs, hypotheses, cfg: NPConfig | None = None) -> Decision:
    if detector == "lrt":
        return lrt(model, schedule, obs, hypotheses)
    if detector == "pairwise_np":
        return pairwise_np(model, schedule, obs, hypotheses, cfg or NPConfig())
    raise ConfigError(f"unknown detector {detector!r}; choose from {sorted(DETECTORS)}")


# -- realizing ensembles as schedules -------------------------------------

def realize_random_schedule(ens: Ensemble, m: int, seed=None) -> Schedule:
    """``m`` i.i.d. atom draws by weight."""
    if m < 1:
        raise ConfigError(f"need m >= 1, got {m}")
    rng = np.random.default_rng(seed)
    idx = rng.choice(len(ens), size=m, p=ens.weights)
    return Schedule(ens.atoms[idx], {"design": "random", "atom_index": idx})


def apportion(weights, m: int) -> np.ndarray:
    """Largest-remainder integer counts summing to ``m``; equal remainders favour lower indices."""
    w = np.asarray(weights, dtype=float)
    quota = w * m
    counts = np.floor(quota).astype(int)
    short = m - int(counts.sum())
    if short:
        rem = quota - counts
        order = sorted(range(w.size), key=lambda t: (-rem[t], t))
        for t in order[:short]:
            counts[t] += 1
    return counts


def realize_deterministic_schedule(ens: Ensemble, m: int) -> Schedule:
    """Each atom used ``round(w m)`` times (largest remainder), interleaved round-robin."""
    positive = int(np.count_nonzero(ens.weights > 0))
    if m < positive:
        raise ConfigError(f"m={m} is smaller than the {positive} positive-weight atoms")
    counts = apportion(ens.weights, m)
    left = counts.copy()
    order = []
    while len(order) < m:
        for t in range(len(ens)):
            if left[t]:
                order.append(t)
                left[t] -= 1
    idx = np.array(order, dtype=int)
    return Schedule(ens.atoms[idx], {"design": "deterministic", "atom_index": idx, "counts": counts})


# -- observation files ----------------------------------------------------

def parse_observations(text: str) -> np.ndarray:
    vals = []
    for lineno, ln in enumerate(text.splitlines(), 1):
        ln = ln.strip()
        if not ln:
            continue
        try:
            vals.append(float(ln))
        except ValueError as exc:
            raise ConfigError(f"observation line {lineno}: not a number: {ln!r}") from exc
    y = np.array(vals, dtype=float)
    if not np.all(np.isfinite(y)):
        raise ConfigError("observations must be finite")
    return y


def read_observations(path) -> np.ndarray:
    path = Path(path)
    if not path.is_file():
        raise ConfigError(f"observations file not found: {path}")
    return parse_observations(path.read_text())


def format_observations(y) -> str:
    return "".join(f"{float(v)!r}\n" for v in np.asarray(y).reshape(-1))
