"""Local dimension of boundary measures from ball masses.

Boundary samples are depth-``T`` prefixes stored as int8 rows (one array per
coordinate). The ball of radius ``e^{-j}`` around ``ξ`` for the quasi-metric
``q = exp(-(·|·)_o)`` is the set of points sharing more than ``j`` letters with
``ξ``; for pairs the ``q̄``-ball needs that in both coordinates. Masses are
regressed on ``log r = -j`` by least squares.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence, Tuple, Union

import numpy as np
from sklearn.base import BaseEstimator

from .batch import common_prefix_lengths
from .errors import DimconsError

Samples = Union[np.ndarray, Tuple[np.ndarray, ...]]


@dataclass
class DimensionFit:
    js: np.ndarray
    masses: np.ndarray
    slope: float
    intercept: float
    residual: float
    sample_count: int
    centers: int = 1
    center_slopes: Optional[np.ndarray] = None
    warnings: list = field(default_factory=list)

    @property
    def radii(self) -> np.ndarray:
        return np.exp(-self.js.astype(float))

    @property
    def dimension(self) -> float:
        return self.slope

    @property
    def center_std(self) -> float:
        if self.center_slopes is None or len(self.center_slopes) < 2:
            return float("nan")
        return float(np.std(self.center_slopes, ddof=1))

    def plot_rows(self):
        """``(log r, log mass)`` pairs for plotting."""
        return list(zip((-self.js).astype(float), np.log(self.masses)))


def _as_tuple(samples: Samples) -> Tuple[np.ndarray, ...]:
    if isinstance(samples, np.ndarray):
        return (samples,)
    return tuple(samples)


def ols(x: np.ndarray, y: np.ndarray) -> Tuple[float, float, float]:
    """Slope, intercept and RMS residual of ``y ~ x``."""
    A = np.vstack([x, np.ones_like(x)]).T
    coef, *_ = np.linalg.lstsq(A, y, rcond=None)
    res = y - A @ coef
    return float(coef[0]), float(coef[1]), float(math.sqrt(np.mean(res**2)))


def fit_masses(js: Sequence[int], masses: Sequence[float], sample_count: int = 0) -> DimensionFit:
    """Fit ``log mass = α log r + c`` on the grid ``r = e^{-j}``."""
    js = np.asarray(js, dtype=np.int64)
    masses = np.asarray(masses, dtype=float)
    if len(js) < 2:
        raise DimconsError("empty window: need at least two radii")
    if np.any(np.diff(masses[np.argsort(-js)]) < 0):
        raise AssertionError("ball masses must be nondecreasing in the radius")
    slope, icpt, res = ols(-js.astype(float), np.log(masses))
    return DimensionFit(js, masses, slope, icpt, res, sample_count)


def shared_depth(samples: Samples, center: int) -> np.ndarray:
    """``min`` over coordinates of the common-prefix length with sample ``center``."""
    cols = _as_tuple(samples)
    out = None
    for a in cols:
        cp = common_prefix_lengths(a, a[center])
        out = cp if out is None else np.minimum(out, cp)
    return out


def ball_counts(samples: Samples, centers: Sequence[int], js: Sequence[int]) -> np.ndarray:
    """``counts[c, i]`` = other samples in ``B(center_c, e^{-js[i]})``."""
    js = np.asarray(js)
    out = np.zeros((len(centers), len(js)), dtype=np.int64)
    for ci, c in enumerate(centers):
        cp = shared_depth(samples, c)
        hist = np.bincount(cp, minlength=int(js.max()) + 2)
        tail = np.cumsum(hist[::-1])[::-1]  # tail[k] = #{cp >= k}
        out[ci] = tail[js + 1] - 1  # drop the center itself
    return out


def depth_labels(samples: Samples, js: Sequence[int]) -> dict:
    """Exact ball labels: ``labels[j][i] == labels[j][k]`` iff ``k ∈ B(ξ_i, e^{-j})``.

    Built by refining group ids one letter at a time, so the cost is a sort
    per depth rather than a pass per center.
    """
    cols = _as_tuple(samples)
    N = cols[0].shape[0]
    want = set(int(j) for j in js)
    ids = [np.zeros(N, dtype=np.int64) for _ in cols]
    out = {}
    for d in range(1, max(want) + 2):
        for i, a in enumerate(cols):
            key = ids[i] * 256 + (a[:, d - 1].astype(np.int64) + 128)
            ids[i] = np.unique(key, return_inverse=True)[1].reshape(-1)
        if d - 1 in want:
            lab = ids[0]
            for other in ids[1:]:
                lab = np.unique(lab * (N + 1) + other, return_inverse=True)[1].reshape(-1)
            out[d - 1] = lab
    return out


def _slopes(x: np.ndarray, y: np.ndarray):
    xm = x.mean()
    ym = y.mean(axis=1, keepdims=True)
    slope = ((x - xm) * (y - ym)).sum(axis=1) / ((x - xm) ** 2).sum()
    icpt = ym[:, 0] - slope * xm
    res = np.sqrt(((y - icpt[:, None] - slope[:, None] * x) ** 2).mean(axis=1))
    return slope, icpt, res


def ball_mass_and_dimension_fit(samples: Samples, centers: Union[None, int, Sequence[int]] = None,
                                j_min: int = 2, j_max: Optional[int] = None, min_hits: int = 10,
                                rng: Optional[np.random.Generator] = None) -> DimensionFit:
    """Local-dimension fit from boundary samples.

    Samples are split at random into two halves. For a center in one half the
    other half decides how far its window reaches (the last radius with at
    least ``min_hits / 2`` hits, i.e. about ``min_hits`` in the whole pool) and
    its own half supplies the masses that are regressed. Choosing the window
    from independent counts keeps the last point of each fit from being biased
    upward. The reported slope is the mean of per-center slopes; ``masses``
    holds the pooled mean ball mass per radius (for plots).

    ``centers`` may be ``None`` (every sample), a count drawn at random, or
    explicit indices.
    """
    cols = _as_tuple(samples)
    N, T = cols[0].shape
    if N < 4:
        raise DimconsError("need at least four samples")
    rng = rng or np.random.default_rng(0)
    j_max = T - 2 if j_max is None else min(j_max, T - 2)
    js = np.arange(j_min, j_max + 1)
    if len(js) < 2:
        raise DimconsError(f"empty window [{j_min}, {j_max}] for depth {T}")
    half = rng.random(N) < 0.5
    if isinstance(centers, (int, np.integer)):
        centers = rng.choice(N, size=min(int(centers), N), replace=False)
    centers = np.arange(N) if centers is None else np.asarray(centers)

    labels = depth_labels(cols, js)
    total = np.empty((len(centers), len(js)), dtype=np.int64)
    in_a = np.empty_like(total)
    for i, j in enumerate(js):
        lab = labels[int(j)]
        total[:, i] = np.bincount(lab, minlength=N)[lab[centers]] - 1
        in_a[:, i] = np.bincount(lab, weights=half, minlength=N)[lab[centers]].astype(np.int64)
    own_a = half[centers]
    in_a -= own_a[:, None]
    in_b = total - in_a
    if np.any(np.diff(total, axis=1) > 0):
        raise AssertionError("ball masses must be nondecreasing in the radius")

    warnings = []
    pooled = total.mean(axis=0)
    keep = len(js)
    while keep >= 2 and pooled[keep - 1] < min_hits:
        keep -= 1
    if keep < 2:
        raise DimconsError("empty window: too few samples for two resolvable radii")
    if keep < len(js):
        warnings.append(f"window shrunk from j<={js[-1]} to j<={js[keep - 1]} for {min_hits} hits")
    js, total, in_a, in_b = js[:keep], total[:, :keep], in_a[:, :keep], in_b[:, :keep]

    chooser = np.where(own_a[:, None], in_b, in_a)
    mass = np.where(own_a[:, None], in_a, in_b)
    n_own = np.where(own_a, half.sum() - 1, N - half.sum() - 1)
    ok = chooser >= max(1, min_hits / 2)
    last = np.where(ok.any(axis=1), keep - 1 - np.argmax(ok[:, ::-1], axis=1), -1)
    x = -js.astype(float)
    slopes, icpts, resids = [], [], []
    dropped = 0
    for k in range(1, keep):
        rows = np.nonzero(last == k)[0]
        if len(rows) == 0:
            continue
        m = mass[rows, : k + 1]
        good = (m > 0).all(axis=1)
        dropped += int((~good).sum())
        rows, m = rows[good], m[good]
        if len(rows) == 0:
            continue
        s, c, r = _slopes(x[: k + 1], np.log(m / n_own[rows, None]))
        slopes.append(s)
        icpts.append(c)
        resids.append(r)
    if not slopes:
        raise DimconsError("no center has two resolvable radii")
    per = np.concatenate(slopes)
    unused = len(centers) - len(per)
    if unused:
        warnings.append(f"{unused} of {len(centers)} centers unusable ({dropped} with an empty ball)")
    masses = pooled[:keep] / (N - 1)
    return DimensionFit(js, masses, float(per.mean()), float(np.concatenate(icpts).mean()),
                        float(np.concatenate(resids).mean()), N, len(per), per, warnings)


def exact_srw_fit(m: int, js: Sequence[int]) -> DimensionFit:
    """Fit on exact SRW hitting masses ``ν(B(ξ, e^{-j})) = ν(cyl_{j+1})``."""
    from .harmonic import exact_cylinder_mass

    js = np.asarray(js)
    masses = [exact_cylinder_mass(m, (1,) * (int(j) + 1)) for j in js]
    return fit_masses(js, masses)


class LocalDimensionEstimator(BaseEstimator):
    """Scikit-learn style wrapper around :func:`ball_mass_and_dimension_fit`.

    ``X`` is an ``(N, T)`` int array of boundary prefixes, or a tuple of such
    arrays for product samples.
    """

    def __init__(self, n_centers: Optional[int] = None, j_min: int = 2, j_max: Optional[int] = None,
                 min_hits: int = 10, random_state: int = 0):
        self.n_centers = n_centers
        self.j_min = j_min
        self.j_max = j_max
        self.min_hits = min_hits
        self.random_state = random_state

    def fit(self, X, y=None):
        self.fit_ = ball_mass_and_dimension_fit(
            X, self.n_centers, self.j_min, self.j_max, self.min_hits, np.random.default_rng(self.random_state)
        )
        self.dimension_ = self.fit_.slope
        return self
