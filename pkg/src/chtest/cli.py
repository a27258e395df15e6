"""Command-line entry point.

Exit codes: 0 success, 2 configuration error, 3 degenerate or
indistinguishable model, 4 numerical failure.
"""
from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np

from . import chernoff, design, detect, montecarlo
from .exceptions import (
    ConfigError,
    DegenerateDistributionError,
    IndistinguishableError,
    NumericalError,
)
from .gaussmodels import (
    AnomalyModel,
    Gaussian1D,
    Hypothesis,
    enumerate_hypotheses,
    hypothesis_law,
    read_model_config,
)

EXIT_OK, EXIT_CONFIG, EXIT_DEGENERATE, EXIT_NUMERIC = 0, 2, 3, 4

# Reference simulation set-ups: (model, designs, budgets)
FIGURES = {
    "fig1": dict(
        model=AnomalyModel(100, 1, Gaussian1D(0.0, 1.0), Gaussian1D(0.0, 100.0)),
        designs=[montecarlo.BipartiteDesign(d=6, strict=False), montecarlo.SeparateDesign()],
        m_values=tuple(range(50, 301, 25)),
    ),
    "fig2": dict(
        model=AnomalyModel(102, 1, Gaussian1D(8.0, 1.0), Gaussian1D(0.0, 1.0)),
        designs=[montecarlo.BipartiteDesign(d=6, strict=True), montecarlo.SeparateDesign()],
        m_values=tuple(range(51, 301, 17)),
    ),
}
DEFAULT_TRIALS = 1000


def _vector(text: str) -> np.ndarray:
    try:
        return design.measurement_vector([float(t) for t in text.replace(",", " ").split()])
    except ValueError as exc:
        raise ConfigError(f"bad vector {text!r}") from exc


def _int_list(text: str) -> list[int]:
    try:
        return [int(t) for t in text.replace(",", " ").split()]
    except ValueError as exc:
        raise ConfigError(f"bad integer list {text!r}") from exc


def _require(args, *names):
    for name in names:
        if getattr(args, name, None) is None:
            raise ConfigError(f"--{name.replace('_', '-')} is required for this command")


def _out_dir(args) -> Path:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _model(args) -> AnomalyModel:
    _require(args, "config")
    return read_model_config(args.config)


def _pair(args, model) -> tuple[Hypothesis, Hypothesis]:
    labels = _int_list(args.pair)
    if model.k != 1 or len(labels) != 2:
        raise ConfigError("--pair takes two 1-based variable indices and needs k=1")
    hi, hj = (Hypothesis.from_labels([i]) for i in labels)
    hi.check(model)
    hj.check(model)
    return hi, hj


def _design_object(args, model: AnomalyModel):
    """Rows, a single vector or an ensemble, as selected on the command line."""
    kind = args.design
    n = model.n
    if kind == "hamming74":
        if n != 7:
            raise ConfigError("hamming74 needs n=7")
        return design.hamming74_design()
    if kind == "identity":
        return design.Schedule(np.eye(n))
    if kind == "separate":
        return design.separate_design(n, args.m or n, seed=args.seed)
    if kind == "bipartite":
        _require(args, "m")
        spec = design.BipartiteDesignSpec(n, args.m, args.degree, args.seed, strict=not args.loose)
        return design.bipartite_design(spec)
    if kind == "fixed":
        _require(args, "vector")
        a = _vector(args.vector)
        if a.size != n:
            raise ConfigError(f"--vector has {a.size} entries, model has n={n}")
        return a
    if kind == "schedule":
        _require(args, "schedule")
        return design.read_schedule(args.schedule)
    if kind == "permutation":
        base = design.optimize_base_vector(model, seed=args.seed)
        return design.permutation_ensemble(base.a)
    raise ConfigError(f"design {kind!r} is not available here")


# -- commands -------------------------------------------------------------

def cmd_exponent(args) -> int:
    model = _model(args)
    obj = _design_object(args, model)
    report = chernoff.min_pairwise_exponent(obj, model)
    out = _out_dir(args)
    (out / "exponent.csv").write_text(report.to_csv())
    print(report.summary())
    if report.min_exponent <= 0:
        raise IndistinguishableError(f"zero error exponent between hypotheses "
                                     f"{report.argmin_pair[0] + 1} and {report.argmin_pair[1] + 1}")
    for eps in (0.1, 0.01):
        m = chernoff.sample_complexity(report.min_exponent, model.n, model.k, eps)
        print(f"m(eps={eps})={m}")
    return EXIT_OK


def cmd_design(args) -> int:
    out = _out_dir(args)
    info: list[str] = []
    kind = args.design
    if kind == "hamming74" and args.config is None:
        rows = design.hamming74_design()
    else:
        model = _model(args)
        if kind == "mean-shift":
            hi, hj = _pair(args, model)
            li, lj = hypothesis_law(model, hi), hypothesis_law(model, hj)
            if not np.array_equal(li.covariance, lj.covariance):
                raise ConfigError("mean-shift design needs equal covariances (equal-variance model)")
            res = design.optimal_mean_shift(li.mean, lj.mean, li.covariance)
            rows = design.Schedule(res.a)
            info.append(f"a={' '.join(repr(float(x)) for x in res.a)}")
            info.append(f"exponent={res.exponent!r}")
        elif kind == "variance":
            hi, hj = _pair(args, model)
            res = design.optimal_variance_discrimination(hypothesis_law(model, hi).covariance,
                                                         hypothesis_law(model, hj).covariance)
            rows = design.Schedule(res.a)
            info += [f"a={' '.join(repr(float(x)) for x in res.a)}", f"B={res.B!r}",
                     f"lambda_star={res.lambda_star!r}", f"exponent={res.exponent!r}"]
        else:
            obj = _design_object(args, model)
            if isinstance(obj, chernoff.Ensemble):
                info.append("weights=" + " ".join(repr(float(w)) for w in obj.weights))
                rows = design.Schedule(obj.atoms)
            else:
                rows = obj if isinstance(obj, design.Schedule) else design.Schedule(obj)
    text = design.format_schedule(rows)
    (out / "design.txt").write_text(text)
    sys.stdout.write(text)
    for key, value in sorted(getattr(rows, "metadata", {}).items()):
        info.append(f"{key}={value}")
    for line in info:
        print(f"# {line}", file=sys.stderr)
    return EXIT_OK


def _simulate_designs(args, model):
    kind = args.design
    if kind == "separate":
        return montecarlo.SeparateDesign()
    if kind == "bipartite":
        return montecarlo.BipartiteDesign(d=args.degree, strict=not args.loose)
    if kind in ("fixed", "schedule", "hamming74", "identity"):
        obj = _design_object(args, model)
        return montecarlo.FixedDesign(np.asarray(getattr(obj, "rows", obj)), name=kind)
    if kind == "permutation":
        ens = _design_object(args, model)
        return montecarlo.EnsembleDesign(ens, regime=args.regime, name=f"permutation-{args.regime}")
    raise ConfigError(f"design {kind!r} cannot be simulated")


def cmd_simulate(args) -> int:
    model = _model(args)
    _require(args, "m_values")
    d = _simulate_designs(args, model)
    plan = montecarlo.TrialPlan(model, d, tuple(_int_list(args.m_values)),
                                args.trials or DEFAULT_TRIALS, args.detector, args.seed,
                                freeze_design=args.freeze_design,
                                np_config=detect.NPConfig(args.threshold))
    points = montecarlo.error_curve(plan, workers=args.workers)
    text = montecarlo.format_curve(points, d.name, args.detector)
    out = _out_dir(args)
    (out / "curve.csv").write_text(text)
    (out / "plot_curve.py").write_text(montecarlo.plot_script("curve.csv"))
    sys.stdout.write(text)
    return EXIT_OK


def cmd_reproduce(args) -> int:
    fig = FIGURES[args.figure]
    trials = args.trials or DEFAULT_TRIALS
    chunks = []
    for k, d in enumerate(fig["designs"]):
        plan = montecarlo.TrialPlan(fig["model"], d, fig["m_values"], trials, "lrt", args.seed)
        points = montecarlo.error_curve(plan, workers=args.workers)
        chunks.append(montecarlo.format_curve(points, d.name, "lrt", header=(k == 0)))
    text = "".join(chunks)
    out = _out_dir(args)
    (out / f"{args.figure}.csv").write_text(text)
    (out / f"plot_{args.figure}.py").write_text(montecarlo.plot_script(f"{args.figure}.csv"))
    sys.stdout.write(text)
    return EXIT_OK


def cmd_detect(args) -> int:
    model = _model(args)
    _require(args, "schedule", "observations")
    rows = design.read_schedule(args.schedule)
    y = detect.read_observations(args.observations)
    hyps = enumerate_hypotheses(model.n, model.k)
    decision = detect.decide(args.detector, model, rows, y, hyps, detect.NPConfig(args.threshold))
    print(decision)
    return EXIT_OK


# -- parser ---------------------------------------------------------------

def _global_flags(parser, suppress: bool) -> None:
    default = argparse.SUPPRESS if suppress else None
    parser.add_argument("--config", default=default, help="model config (key=value lines)")
    parser.add_argument("--seed", type=int, default=default, help="master seed (required)")
    parser.add_argument("--out", default=argparse.SUPPRESS if suppress else ".", help="output directory")
    parser.add_argument("--workers", type=int, default=argparse.SUPPRESS if suppress else 1)
    parser.add_argument("--trials", type=int, default=default, help="trials per budget")


def _design_flags(parser, choices) -> None:
    parser.add_argument("--design", required=True, choices=choices)
    parser.add_argument("--m", type=int, help="number of measurements")
    parser.add_argument("--degree", type=int, default=6, help="edges per measurement (bipartite)")
    parser.add_argument("--loose", action="store_true",
                        help="bipartite: allow unequal variable degrees when d*m %% n != 0")
    parser.add_argument("--vector", help="comma-separated coefficients (fixed design)")
    parser.add_argument("--schedule", help="schedule file (schedule design)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="chtest", description=__doc__.splitlines()[0])
    _global_flags(parser, suppress=False)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("exponent", help="pairwise error exponents of a design")
    _global_flags(p, suppress=True)
    _design_flags(p, ["hamming74", "identity", "separate", "bipartite", "fixed", "schedule", "permutation"])
    p.set_defaults(func=cmd_exponent)

    p = sub.add_parser("design", help="emit a measurement design")
    _global_flags(p, suppress=True)
    _design_flags(p, ["hamming74", "identity", "separate", "bipartite", "fixed", "schedule",
                      "permutation", "mean-shift", "variance"])
    p.add_argument("--pair", default="1,2", help="two variables (1-based) for mean-shift/variance")
    p.set_defaults(func=cmd_design)

    p = sub.add_parser("simulate", help="Monte Carlo error curve")
    _global_flags(p, suppress=True)
    _design_flags(p, ["separate", "bipartite", "fixed", "schedule", "hamming74", "identity", "permutation"])
    p.add_argument("--m-values", help="comma-separated budgets, increasing")
    p.add_argument("--detector", default="lrt", choices=["lrt", "pairwise_np"])
    p.add_argument("--threshold", type=float, default=0.0, help="pairwise log-likelihood threshold")
    p.add_argument("--regime", default="random", choices=["random", "deterministic"])
    p.add_argument("--freeze-design", action="store_true", help="one design realization per budget")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("reproduce", help="rerun a reference simulation")
    _global_flags(p, suppress=True)
    p.add_argument("figure", choices=sorted(FIGURES))
    p.set_defaults(func=cmd_reproduce)

    p = sub.add_parser("detect", help="decide from a schedule and observations")
    _global_flags(p, suppress=True)
    p.add_argument("--schedule")
    p.add_argument("--observations")
    p.add_argument("--detector", default="lrt", choices=["lrt", "pairwise_np"])
    p.add_argument("--threshold", type=float, default=0.0)
    p.set_defaults(func=cmd_detect)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.seed is None:
            raise ConfigError("--seed is required (no implicit entropy)")
        if args.trials is not None and args.trials < 1:
            raise ConfigError("--trials must be >= 1")
        return args.func(args)
    except (IndistinguishableError, DegenerateDistributionError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DEGENERATE
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (NumericalError, FloatingPointError, np.linalg.LinAlgError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
