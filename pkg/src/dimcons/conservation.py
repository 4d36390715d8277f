"""Conditional dimensions and the dimension-conservation report.

For ``π`` on ``Γ × Γ*`` with drifts ``l ≥ l*`` the harmonic measure splits as

    dim ν_π = dim ν_π^η + dim ν_μ*,   dim ν_π^η = (h(π) - h*) / l,   dim ν_μ* = h* / l*

where ``h*`` is the entropy of the second marginal. Closed forms are attached
when the drifts and entropies are known exactly; everything else is marked
``empirical-only``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .dimension import DimensionFit, ball_mass_and_dimension_fit
from .errors import UnsupportedSpecError
from .groups import BoundaryApprox
from .harmonic import DoobWalkSpec, boundary_sample, boundary_samples, doob_boundary_samples
from .measures import (DiagonalPush, NoiseMixture, ProductMeasure, ProductSpec, SingleMeasure,
                       Swapped, radial_params)
from .rng import stream
from .walks import drift_estimate

CLOSED = "closed-form"
EMPIRICAL = "empirical-only"


def radial_drift(spec: SingleMeasure) -> float:
    m, hold = radial_params(spec)
    return (1 - hold) * (m - 1) / m


def radial_entropy(spec: SingleMeasure) -> float:
    m, hold = radial_params(spec)
    return (1 - hold) * (m - 1) / m * math.log(2 * m - 1)


def marginal_drift(spec: SingleMeasure, seed: int = 0) -> tuple:
    """``(drift, provenance)``; estimated by simulation when no closed form exists."""
    try:
        return radial_drift(spec), CLOSED
    except UnsupportedSpecError:
        return drift_estimate(spec, 2000, 64, seed).estimate, EMPIRICAL


def joint_entropy(spec: ProductSpec) -> Optional[float]:
    """``h(π)`` when it reduces to radial closed forms."""
    try:
        if isinstance(spec, Swapped):
            return joint_entropy(spec.inner)
        if isinstance(spec, ProductMeasure):
            return radial_entropy(spec.first) + radial_entropy(spec.second)
        if isinstance(spec, DiagonalPush):
            return radial_entropy(spec.base)
        if isinstance(spec, NoiseMixture) and spec.rho in (0, 1):
            return radial_entropy(spec.base) * (2 if spec.rho == 1 else 1)
    except UnsupportedSpecError:
        return None
    return None


@dataclass
class Theory:
    """Reference values. ``None`` means no closed form is available."""

    l: Optional[float] = None
    l_star: Optional[float] = None
    h: Optional[float] = None
    h_star: Optional[float] = None
    provenance: dict = field(default_factory=dict)

    def _ok(self, *xs):
        return all(x is not None for x in xs)

    @property
    def dim_conditional(self) -> Optional[float]:
        return (self.h - self.h_star) / self.l if self._ok(self.h, self.h_star, self.l) else None

    @property
    def dim_second(self) -> Optional[float]:
        return self.h_star / self.l_star if self._ok(self.h_star, self.l_star) else None

    @property
    def dim_joint(self) -> Optional[float]:
        a, b = self.dim_conditional, self.dim_second
        return a + b if self._ok(a, b) else None

    def as_dict(self) -> dict:
        return {
            "l": self.l, "l_star": self.l_star, "h": self.h, "h_star": self.h_star,
            "dim_conditional": self.dim_conditional, "dim_second": self.dim_second, "dim_joint": self.dim_joint,
            "provenance": dict(self.provenance),
        }


def theory(spec: ProductSpec, h: Optional[float] = None) -> Theory:
    """Closed-form inputs; an empirical ``h`` may be supplied for mixtures."""
    first, second = spec.marginals()
    t = Theory()
    for name, marg in (("l", first), ("l_star", second)):
        try:
            setattr(t, name, radial_drift(marg))
            t.provenance[name] = CLOSED
        except UnsupportedSpecError:
            t.provenance[name] = EMPIRICAL
    try:
        t.h_star = radial_entropy(second)
        t.provenance["h_star"] = CLOSED
    except UnsupportedSpecError:
        t.provenance["h_star"] = EMPIRICAL
    t.h = joint_entropy(spec)
    t.provenance["h"] = CLOSED
    if t.h is None:
        t.h = h
        t.provenance["h"] = "empirical estimate" if h is not None else EMPIRICAL
    return t


def ordered(spec: ProductSpec, seed: int = 0) -> tuple:
    """``(spec with l ≥ l*, swapped?)``."""
    a, b = spec.marginals()
    la, _ = marginal_drift(a, seed)
    lb, _ = marginal_drift(b, seed)
    if la + 1e-12 < lb:
        return (spec.inner if isinstance(spec, Swapped) else Swapped(spec)), True
    return spec, False


@dataclass
class ConditionalDimensionReport:
    fit: DimensionFit
    eta: BoundaryApprox
    theoretical: Optional[float]
    provenance: str
    depth_check: Optional[dict] = None

    @property
    def dimension(self) -> float:
        return self.fit.dimension


def _truncate(eta: BoundaryApprox, depth: int) -> BoundaryApprox:
    return BoundaryApprox.from_letters(eta.group, eta.letters[:depth])


def conditional_dimension_estimate(spec: ProductSpec, eta: Optional[BoundaryApprox] = None, samples: int = 50_000,
                                   depth: int = 24, eta_depth: int = 128, seed: int = 0, j_min: int = 2,
                                   min_hits: int = 10, depth_doubling: bool = True,
                                   h: Optional[float] = None) -> ConditionalDimensionReport:
    """Fit the dimension of ``ν_π^η`` from Doob-conditioned walkers.

    ``eta`` defaults to a draw from the second marginal's harmonic measure.
    With ``depth_doubling`` the fit is repeated with ``eta`` cut to half its
    depth and the difference is reported.
    """
    if eta is None:
        eta = boundary_sample(spec.marginals()[1], eta_depth, seed)
    rng = stream(seed, 1)

    def fit_for(e):
        x = doob_boundary_samples(DoobWalkSpec(spec, e), depth, samples, seed)
        return ball_mass_and_dimension_fit(x, None, j_min, None, min_hits, np.random.default_rng(rng.integers(2**32)))

    fit = fit_for(eta)
    check = None
    if depth_doubling and eta.depth >= 2 * depth:
        half = fit_for(_truncate(eta, eta.depth // 2))
        check = {"depth": eta.depth, "half_depth": eta.depth // 2, "dimension_half": half.dimension,
                 "difference": fit.dimension - half.dimension}
    th = theory(spec, h)
    value = th.dim_conditional
    prov = th.provenance["h"] if value is not None else EMPIRICAL
    if value is not None and prov == CLOSED and (th.provenance["l"] != CLOSED or th.provenance["h_star"] != CLOSED):
        prov = EMPIRICAL
    return ConditionalDimensionReport(fit, eta, value, prov, check)


@dataclass
class ConservationReport:
    dim_joint: float
    dim_conditional: float
    dim_second: float
    residual: float
    swapped: bool
    theory: Theory
    joint_fit: DimensionFit
    second_fit: DimensionFit
    conditional: list

    def summary(self) -> dict:
        return {
            "dim_joint": self.dim_joint, "dim_conditional": self.dim_conditional, "dim_second": self.dim_second,
            "residual": self.residual, "swapped": self.swapped, "theory": self.theory.as_dict(),
        }


def dimension_conservation_report(spec: ProductSpec, samples: int = 200_000, depth: int = 20,
                                  cond_samples: int = 50_000, cond_depth: int = 24, etas: int = 3,
                                  eta_depth: int = 128, seed: int = 0, j_min: int = 2, min_hits: int = 10,
                                  h: Optional[float] = None) -> ConservationReport:
    """Estimate ``dim ν_π``, the mean ``dim ν_π^η`` and ``dim ν_μ*``, and the residual.

    Coordinates are reordered so the first has the larger drift; ``swapped``
    records whether that happened.
    """
    if not spec.is_product:
        raise UnsupportedSpecError("conservation needs a product measure")
    spec, swapped = ordered(spec, seed)
    pts = boundary_samples(spec, depth, samples, seed)
    rng = stream(seed, 2)
    joint = ball_mass_and_dimension_fit(pts, None, j_min, None, min_hits, np.random.default_rng(rng.integers(2**32)))
    second = ball_mass_and_dimension_fit(pts[1], None, j_min, None, min_hits,
                                         np.random.default_rng(rng.integers(2**32)))
    conds = [
        conditional_dimension_estimate(spec, None, cond_samples, cond_depth, eta_depth, seed + 1000 * (k + 1),
                                       j_min, min_hits, depth_doubling=False, h=h)
        for k in range(etas)
    ]
    dim_c = float(np.mean([c.dimension for c in conds]))
    resid = joint.dimension - (dim_c + second.dimension)
    return ConservationReport(joint.dimension, dim_c, second.dimension, resid, swapped, theory(spec, h), joint,
                              second, conds)
