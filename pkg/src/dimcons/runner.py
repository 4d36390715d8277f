"""Dispatch an :class:`ExperimentConfig` to the estimators and write result files.

Each run writes ``<experiment>.csv`` (data rows), ``<experiment>.json``
(config echo, versions, wall time, summary) and, for dimension fits,
``<experiment>_fit.dat`` with ``log r`` and ``log mass`` columns. Numbers in
the CSV are printed with 12 significant digits so identical configs give
identical bytes.
"""
from __future__ import annotations

import csv
import json
import math
import platform
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, List, Optional, Sequence

import numpy as np

from . import __version__
from .config import ExperimentConfig
from .errors import DimconsError

SIG = 12


def fmt(v: Any) -> str:
    if v is None:
        return ""
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        v = float(v)
        if math.isnan(v):
            return "nan"
        return format(v, f".{SIG}g")
    return str(v)


def _clean(v):
    if isinstance(v, dict):
        return {str(k): _clean(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_clean(x) for x in v]
    if isinstance(v, (np.integer,)):
        return int(v)
    if isinstance(v, (np.floating, float)):
        v = float(v)
        return None if math.isnan(v) else float(fmt(v))
    return v


@dataclass
class ResultTable:
    columns: List[str]
    rows: List[Sequence]
    summary: dict = field(default_factory=dict)
    plot: Optional[List[tuple]] = None
    wall_time: float = 0.0

    def write(self, out: Path, name: str, config: ExperimentConfig) -> dict:
        out.mkdir(parents=True, exist_ok=True)
        paths = {"csv": out / f"{name}.csv", "json": out / f"{name}.json"}
        with open(paths["csv"], "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh)
            w.writerow(self.columns)
            for row in self.rows:
                w.writerow([fmt(v) for v in row])
        if self.plot is not None:
            paths["dat"] = out / f"{name}_fit.dat"
            with open(paths["dat"], "w", encoding="utf-8") as fh:
                fh.write("# log_r log_mass\n")
                for x, y in self.plot:
                    fh.write(f"{fmt(x)} {fmt(y)}\n")
        meta = {
            "config": config.to_dict(),
            "summary": _clean(self.summary),
            "versions": {"dimcons": __version__, "numpy": np.__version__, "python": platform.python_version()},
            "wall_time_seconds": round(self.wall_time, 3),
        }
        paths["json"].write_text(json.dumps(meta, indent=2, sort_keys=True) + "\n", encoding="utf-8")
        return {k: str(v) for k, v in paths.items()}


def _theory_drift(marg):
    from .conservation import CLOSED, EMPIRICAL, radial_drift
    from .errors import UnsupportedSpecError

    try:
        return radial_drift(marg), CLOSED
    except UnsupportedSpecError:
        if len(marg.support()) == 1:
            return float(len(marg.support()[0][0])), "point mass"
        return None, EMPIRICAL


def _drift(cfg: ExperimentConfig) -> ResultTable:
    from .walks import drift_estimate

    spec = cfg.spec()
    margs = spec.marginals() if spec.is_product else (spec,)
    rows = []
    summary = {}
    for i, marg in enumerate(margs):
        rep = drift_estimate(marg, cfg.n, cfg.trials, cfg.seed + i)
        ref, prov = _theory_drift(marg)
        rows.append((i + 1, cfg.n, cfg.trials, rep.estimate, rep.stderr, ref, prov))
        summary[f"coordinate_{i + 1}"] = {"estimate": rep.estimate, "stderr": rep.stderr, "theoretical": ref,
                                          "provenance": prov}
    summary["estimate"] = rows[0][3]
    return ResultTable(["coordinate", "n", "trials", "estimate", "stderr", "theoretical", "provenance"], rows,
                       summary)


def _entropy(cfg: ExperimentConfig) -> ResultTable:
    from .conservation import CLOSED, EMPIRICAL, joint_entropy, radial_entropy
    from .errors import UnsupportedSpecError
    from .walks import entropy_rate

    spec = cfg.spec()
    method = cfg.param("method", "exact-radial")
    rep = entropy_rate(spec, method, cfg.n, cfg.trials, cfg.seed, int(cfg.param("particles", 128)))
    try:
        ref = joint_entropy(spec) if spec.is_product else radial_entropy(spec)
    except UnsupportedSpecError:
        ref = None
    prov = CLOSED if ref is not None else EMPIRICAL
    row = (method, cfg.n, rep.estimate, rep.stderr, ref, prov)
    return ResultTable(["method", "n", "estimate", "stderr", "theoretical", "provenance"], [row],
                       {"estimate": rep.estimate, "stderr": rep.stderr, "theoretical": ref, "provenance": prov,
                        "diagnostics": rep.diagnostics})


def _fit_rows(fit):
    return [(int(j), -float(j), float(m), math.log(m)) for j, m in zip(fit.js, fit.masses)]


FIT_COLUMNS = ["j", "log_r", "mass", "log_mass"]


def _fit_summary(fit) -> dict:
    return {"dimension": fit.dimension, "residual": fit.residual, "center_std": fit.center_std,
            "centers": fit.centers, "samples": fit.sample_count, "window": [int(fit.js[0]), int(fit.js[-1])],
            "warnings": list(fit.warnings)}


def _dimension(cfg: ExperimentConfig) -> ResultTable:
    from .conservation import CLOSED, EMPIRICAL, radial_drift, radial_entropy, theory
    from .dimension import ball_mass_and_dimension_fit
    from .errors import UnsupportedSpecError
    from .harmonic import boundary_samples
    from .rng import stream

    spec = cfg.spec()
    samples = int(cfg.param("samples", 100_000))
    pts = boundary_samples(spec, cfg.depth, samples, cfg.seed)
    pts = pts if spec.is_product else pts[0]
    fit = ball_mass_and_dimension_fit(pts, cfg.param("centers", None), cfg.j_min, cfg.j_max,
                                      int(cfg.param("min_hits", 10)), stream(cfg.seed, 3))
    if spec.is_product:
        ref = theory(spec).dim_joint
    else:
        try:
            ref = radial_entropy(spec) / radial_drift(spec)
        except UnsupportedSpecError:
            ref = None
    summary = _fit_summary(fit)
    summary.update({"theoretical": ref, "provenance": CLOSED if ref is not None else EMPIRICAL})
    return ResultTable(FIT_COLUMNS, _fit_rows(fit), summary, fit.plot_rows())


def _conditional(cfg: ExperimentConfig) -> ResultTable:
    from .conservation import conditional_dimension_estimate

    spec = cfg.spec()
    rep = conditional_dimension_estimate(spec, None, int(cfg.param("samples", 50_000)), cfg.depth,
                                         int(cfg.param("eta_depth", 128)), cfg.seed, cfg.j_min,
                                         int(cfg.param("min_hits", 10)), bool(cfg.param("depth_doubling", True)),
                                         cfg.param("h", None))
    summary = _fit_summary(rep.fit)
    summary.update({"theoretical": rep.theoretical, "provenance": rep.provenance, "depth_check": rep.depth_check,
                    "eta": str(rep.eta)})
    return ResultTable(FIT_COLUMNS, _fit_rows(rep.fit), summary, rep.fit.plot_rows())


def _conservation(cfg: ExperimentConfig) -> ResultTable:
    from .conservation import dimension_conservation_report

    spec = cfg.spec()
    rep = dimension_conservation_report(spec, int(cfg.param("samples", 200_000)), cfg.depth,
                                        int(cfg.param("cond_samples", 50_000)), int(cfg.param("cond_depth", 24)),
                                        int(cfg.param("etas", 3)), int(cfg.param("eta_depth", 128)), cfg.seed,
                                        cfg.j_min, int(cfg.param("min_hits", 10)), cfg.param("h", None))
    th = rep.theory
    prov = th.provenance
    rows = [
        ("dim_joint", rep.dim_joint, th.dim_joint, "derived" if th.dim_joint is not None else "empirical-only"),
        ("dim_conditional", rep.dim_conditional, th.dim_conditional,
         "derived" if th.dim_conditional is not None else "empirical-only"),
        ("dim_second", rep.dim_second, th.dim_second, "derived" if th.dim_second is not None else "empirical-only"),
        ("residual", rep.residual, 0.0, "identity"),
    ]
    summary = rep.summary()
    summary["inputs_provenance"] = prov
    summary["per_eta"] = [c.dimension for c in rep.conditional]
    return ResultTable(["quantity", "estimate", "theoretical", "provenance"], rows, summary,
                       rep.joint_fit.plot_rows())


def _pivotal(cfg: ExperimentConfig) -> ResultTable:
    from .pivotal.coupling import pivotal_stats_and_entropy_gap
    from .pivotal.times import PivotalConstants

    spec = cfg.spec()
    ns = tuple(int(n) for n in cfg.param("ns", [200, 400, 800]))
    consts = PivotalConstants(int(cfg.param("C0", 4)), int(cfg.param("D", 81)), float(cfg.param("eps", 0.01)))
    rep = pivotal_stats_and_entropy_gap(spec, ns, cfg.trials, cfg.seed, consts,
                                        float(cfg.param("kappa_fraction", 0.75)))
    rows = [(n, mean, se, tau, rep.tail_frequency[n]) for n, mean, se, tau in rep.curve()]
    summary = {"kappa_hat": rep.kappa_hat, "gap_bound": rep.gap_bound, "provenance": "empirical-only",
               "schottky_size": len(rep.setup.certificate.S), "alpha": rep.setup.alpha, "beta": rep.setup.beta,
               "M": rep.setup.M, "flag_probability": rep.setup.flag_probability,
               "tail_frequency": {str(n): f for n, f in rep.tail_frequency.items()}}
    return ResultTable(["n", "mean_pivots_per_n", "stderr", "mean_tau_per_n", "tail_frequency"], rows, summary)


def _self_test(cfg: ExperimentConfig) -> ResultTable:
    from .selftest import run_self_test

    checks = run_self_test(cfg.param("level", "fast"))
    rows = [(c.name, c.passed, c.seconds) for c in checks]
    return ResultTable(["check", "passed", "seconds"], rows, {"passed": all(c.passed for c in checks)})


DISPATCH = {
    "drift": _drift,
    "entropy": _entropy,
    "dimension": _dimension,
    "conditional-dimension": _conditional,
    "conservation": _conservation,
    "pivotal": _pivotal,
    "self-test": _self_test,
}


def run_experiment(cfg: ExperimentConfig, write: bool = True) -> ResultTable:
    """Run ``cfg`` and, unless ``write`` is false, write its result files under ``cfg.out``."""
    t = time.perf_counter()
    try:
        table = DISPATCH[cfg.experiment](cfg)
    except DimconsError as exc:
        exc.experiment = cfg.experiment
        raise
    table.wall_time = time.perf_counter() - t
    if write:
        table.summary["files"] = table.write(Path(cfg.out), cfg.experiment, cfg)
    return table
