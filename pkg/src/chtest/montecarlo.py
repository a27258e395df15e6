"""Seeded error-probability experiments.

Every trial owns a generator derived from ``(master_seed, m, trial)``, so
results do not depend on execution order or on which other budgets were
run, and any subset of trials can be rerun in isolation.
"""
from __future__ import annotations

import io
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import NamedTuple, Sequence, Union

import numpy as np
from scipy import stats

from .chernoff import Ensemble
from .design import BipartiteDesignSpec, Schedule, bipartite_design, separate_design
from .detect import NPConfig, as_rows, decide, realize_deterministic_schedule, realize_random_schedule
from .exceptions import ChtestError, ConfigError
from .gaussmodels import AnomalyModel, Hypothesis, enumerate_hypotheses


# -- design selectors -----------------------------------------------------

@dataclass(frozen=True)
class FixedDesign:
    """Given rows, cycled to the requested budget (a single row gives time-invariant sensing)."""

    rows: np.ndarray
    name: str = "fixed"

    def realize(self, n, m, rng):
        rows = as_rows(self.rows, n)
        return rows[np.arange(m) % rows.shape[0]]


@dataclass(frozen=True)
class SeparateDesign:
    name: str = "separate"

    def realize(self, n, m, rng):
        return separate_design(n, m, seed=rng).rows


@dataclass(frozen=True)
class BipartiteDesign:
    d: int = 6
    strict: bool = True
    name: str = "bipartite"

    def realize(self, n, m, rng):
        seed = int(rng.integers(2**63))
        return bipartite_design(BipartiteDesignSpec(n, m, self.d, seed, self.strict)).rows


@dataclass(frozen=True)
class EnsembleDesign:
    ensemble: Ensemble
    regime: str = "random"
    name: str = "ensemble"

    def __post_init__(self):
        if self.regime not in ("random", "deterministic"):
            raise ConfigError(f"regime must be 'random' or 'deterministic', got {self.regime!r}")

    def realize(self, n, m, rng):
        if self.regime == "random":
            return realize_random_schedule(self.ensemble, m, seed=rng).rows
        return realize_deterministic_schedule(self.ensemble, m).rows


Design = Union[FixedDesign, SeparateDesign, BipartiteDesign, EnsembleDesign]


@dataclass(frozen=True)
class TrialPlan:
    model: AnomalyModel
    design: Design
    m_values: tuple[int, ...]
    trials: int
    detector: str = "lrt"
    master_seed: int = 0
    freeze_design: bool = False
    np_config: NPConfig = field(default_factory=NPConfig)

    def __post_init__(self):
        ms = tuple(int(m) for m in self.m_values)
        if not ms:
            raise ConfigError("m_values is empty")
        if any(b <= a for a, b in zip(ms, ms[1:])):
            raise ConfigError(f"m_values must be strictly increasing, got {ms}")
        if ms[0] < 0:
            raise ConfigError("budgets must be nonnegative")
        if self.trials < 1:
            raise ConfigError(f"need trials >= 1, got {self.trials}")
        if self.detector not in ("lrt", "pairwise_np"):
            raise ConfigError(f"unknown detector {self.detector!r}")
        object.__setattr__(self, "m_values", ms)


class ErrorCurvePoint(NamedTuple):
    m: int
    trials: int
    errors: int
    error_rate: float
    ci_low: float
    ci_high: float


class ExponentFit(NamedTuple):
    slope: float
    stderr: float


# -- seeding --------------------------------------------------------------

def trial_rng(master_seed: int, m: int, trial: int) -> np.random.Generator:
    """Independent stream for one (budget, trial) cell."""
    return np.random.default_rng(np.random.SeedSequence(master_seed, spawn_key=(int(m), int(trial))))


def design_rng(master_seed: int, m: int) -> np.random.Generator:
    # spawn keys of length 1 never collide with the (m, trial) trial keys
    return np.random.default_rng(np.random.SeedSequence(master_seed, spawn_key=(int(m),)))


# -- single trial ---------------------------------------------------------

def draw_realizations(model: AnomalyModel, truth: Hypothesis, m: int, rng: np.random.Generator) -> np.ndarray:
    """``(n, m)`` table of independent draws; column ``j`` feeds measurement ``j`` only."""
    truth.check(model)
    mean = np.full((model.n, 1), model.common.mean)
    sd = np.full((model.n, 1), math.sqrt(model.common.variance))
    idx = list(truth.support)
    mean[idx] = model.anomalous.mean
    sd[idx] = math.sqrt(model.anomalous.variance)
    return mean + sd * rng.standard_normal((model.n, m))


def observe(schedule, x: np.ndarray) -> np.ndarray:
    """``Y_j = <A^j, X^j>`` for each column of realizations."""
    rows = np.asarray(getattr(schedule, "rows", schedule), dtype=float)
    return np.einsum("ji,ij->j", rows, x)


def simulate_trial(model: AnomalyModel, truth: Hypothesis, schedule, detector: str = "lrt",
                   seed=None, hypotheses: Sequence[Hypothesis] | None = None,
                   np_config: NPConfig | None = None) -> bool:
    """One experiment: draw, observe, decide.  True when the truth is selected."""
    rng = np.random.default_rng(seed)
    rows = as_rows(schedule, model.n)
    hyps = hypotheses if hypotheses is not None else enumerate_hypotheses(model.n, model.k)
    x = draw_realizations(model, truth, rows.shape[0], rng)
    y = observe(rows, x)
    decision = decide(detector, model, rows, y, hyps, np_config)
    return decision.hypothesis == truth


# -- curves ---------------------------------------------------------------

def wilson_interval(errors: int, trials: int, confidence: float = 0.95) -> tuple[float, float]:
    ci = stats.binomtest(errors, trials).proportion_ci(confidence_level=confidence, method="wilson")
    return float(ci.low), float(ci.high)


def draw_truth(hypotheses: Sequence[Hypothesis], rng: np.random.Generator) -> Hypothesis:
    """Uniform pick; always the first draw from a trial's generator."""
    return hypotheses[int(rng.integers(len(hypotheses)))]


def _run_cell(plan: TrialPlan, hyps, m: int, trial: int, frozen) -> bool:
    rng = trial_rng(plan.master_seed, m, trial)
    truth = draw_truth(hyps, rng)
    if frozen is not None:
        rows = frozen
    elif m == 0:
        rows = np.zeros((0, plan.model.n))
    else:
        rows = plan.design.realize(plan.model.n, m, rng)
    x = draw_realizations(plan.model, truth, m, rng)
    y = observe(rows, x)
    return decide(plan.detector, plan.model, rows, y, hyps, plan.np_config).hypothesis == truth


def _run_budget(plan: TrialPlan, m: int) -> ErrorCurvePoint:
    hyps = enumerate_hypotheses(plan.model.n, plan.model.k)
    frozen = None
    if plan.freeze_design and m > 0:
        frozen = plan.design.realize(plan.model.n, m, design_rng(plan.master_seed, m))
    errors = 0
    for t in range(plan.trials):
        try:
            ok = _run_cell(plan, hyps, m, t, frozen)
        except ChtestError as exc:
            raise type(exc)(f"m={m}, trial={t}: {exc}") from exc
        errors += not ok
    lo, hi = wilson_interval(errors, plan.trials)
    rate = errors / plan.trials
    return ErrorCurvePoint(m, plan.trials, errors, rate, min(lo, rate), max(hi, rate))


def error_curve(plan: TrialPlan, workers: int = 1) -> list[ErrorCurvePoint]:
    """Error rate with a 95% Wilson interval at every budget in the plan.

    ``workers > 1`` spreads budgets over processes; output is identical.
    """
    if workers <= 1 or len(plan.m_values) == 1:
        return [_run_budget(plan, m) for m in plan.m_values]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(_run_budget, [plan] * len(plan.m_values), plan.m_values))


def empirical_exponent(points: Sequence[ErrorCurvePoint]) -> ExponentFit:
    """Least-squares slope of ``-log(error_rate)`` against ``m``; zero-rate points dropped."""
    usable = [(p.m, p.error_rate) for p in points if 0 < p.error_rate < 1]
    if len(usable) < 3:
        raise ConfigError(f"need >= 3 points with 0 < error_rate < 1, got {len(usable)}")
    m = np.array([u[0] for u in usable], dtype=float)
    r = -np.log([u[1] for u in usable])
    fit = stats.linregress(m, r)
    return ExponentFit(float(fit.slope), float(fit.stderr))


CURVE_HEADER = "m,design,detector,trials,errors,error_rate,ci_low,ci_high"


def format_curve(points: Sequence[ErrorCurvePoint], design: str, detector: str, header: bool = True) -> str:
    buf = io.StringIO()
    if header:
        buf.write(CURVE_HEADER + "\n")
    for p in points:
        buf.write(f"{p.m},{design},{detector},{p.trials},{p.errors},"
                  f"{p.error_rate!r},{p.ci_low!r},{p.ci_high!r}\n")
    return buf.getvalue()


PLOT_SCRIPT = '''\
"""Plot error-probability curves from {csv_name}."""
import csv
from collections import defaultdict

import matplotlib.pyplot as plt

series = defaultdict(list)
with open({csv_name!r}) as fh:
    for row in csv.DictReader(fh):
        series[(row["design"], row["detector"])].append(row)

fig, ax = plt.subplots()
for (design, detector), rows in sorted(series.items()):
    m = [int(r["m"]) for r in rows]
    p = [float(r["error_rate"]) for r in rows]
    lo = [float(r["error_rate"]) - float(r["ci_low"]) for r in rows]
    hi = [float(r["ci_high"]) - float(r["error_rate"]) for r in rows]
    ax.errorbar(m, p, yerr=[lo, hi], marker="o", capsize=3, label=f"{{design}} ({{detector}})")
ax.set_xlabel("number of measurements m")
ax.set_ylabel("error probability")
ax.set_yscale("symlog", linthresh=1e-3)
ax.legend()
fig.savefig({png_name!r}, dpi=150, bbox_inches="tight")
'''


def plot_script(csv_name: str) -> str:
    png = csv_name.rsplit(".", 1)[0] + ".png"
    return PLOT_SCRIPT.format(csv_name=csv_name, png_name=png)
