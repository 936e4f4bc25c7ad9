"""Transmittance of particle lattices seen through a finite detector.

Measuring a cloud of N identical spread particles spaced one detector
diameter (2r) apart is equivalent, by periodic unfolding, to evaluating a
single particle's interval probability at N detector offsets spaced 2r.
The non-local transmittance is the product of the per-chunk survival
factors; the pilot-wave (localized absorber) comparison model attenuates
linearly with the summed interval probabilities instead.

Products of many near-unity factors are accumulated in log space to avoid
underflow on large lattices.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .distribution import SpreadDistribution, interval_probability

MODELS = ("nonlocal", "pilotwave", "classic", "closed_limit")

DETECTOR_SHAPES = ("interval_1d", "square_2d")

# chunks below this interval probability contribute less than 1e-30 to the
# log-sum, far under the 1e-12 accuracy budget
_NEGLIGIBLE_PV = 1e-30

_LATTICE_SPACING_ATOL = 1e-12


@dataclass(frozen=True)
class DetectorGeometry:
    """Detector half-width ``r``, shape and displacement from the cloud axis."""

    r: float = 1.0
    shape: str = "interval_1d"
    axis_offset: float = 0.0

    def __post_init__(self):
        if not self.r > 0.0:
            raise ValueError(f"detector radius r must be positive, got {self.r}")
        if self.shape not in DETECTOR_SHAPES:
            raise ValueError(f"unknown detector shape {self.shape!r}, "
                             f"expected one of {DETECTOR_SHAPES}")


@dataclass(frozen=True, eq=False)
class ParticleLattice:
    """Evenly spaced chunk offsets (particle center relative to detector)."""

    offsets: np.ndarray
    spacing: float

    def __post_init__(self):
        offsets = np.atleast_1d(np.asarray(self.offsets, dtype=float))
        if offsets.size == 0:
            raise ValueError("lattice needs at least one offset")
        if offsets.size > 1:
            d = np.diff(offsets)
            if not np.all(d > 0):
                raise ValueError("lattice offsets must be strictly increasing")
            if np.max(np.abs(d - self.spacing)) > _LATTICE_SPACING_ATOL:
                raise ValueError(f"lattice offsets must be uniformly spaced by "
                                 f"{self.spacing} within {_LATTICE_SPACING_ATOL:g}")
        object.__setattr__(self, "offsets", offsets)

    def __len__(self):
        return self.offsets.size


def lattice_offsets(n: int, r: float, axis_offset: float = 0.0) -> ParticleLattice:
    """Centered lattice of ``n`` chunks spaced ``2r``, shifted by ``axis_offset``.

    Offsets are ``axis_offset + r*(2k - n - 1)`` for k = 1..n, so an odd
    ``n`` with zero axis offset puts one chunk exactly on the detector axis
    and an even ``n`` centers the detector between two chunks.
    """
    if n < 1:
        raise ValueError(f"lattice size n must be >= 1, got {n}")
    if not r > 0.0:
        raise ValueError(f"detector radius r must be positive, got {r}")
    k = np.arange(1, n + 1, dtype=float)
    return ParticleLattice(offsets=axis_offset + r * (2.0 * k - n - 1), spacing=2.0 * r)


def _check_g(g: float):
    if not 0.0 < g <= 1.0:
        raise ValueError(f"absorbed fraction g must satisfy 0 < g <= 1, got {g}")


def _check_shape_centered(dist: SpreadDistribution):
    if dist.center != 0.0:
        raise ValueError("periodic unfolding needs a distribution shape centered at 0, "
                         f"got center={dist.center}")


def single_particle_tr(dist: SpreadDistribution, o: float, r: float, g: float) -> float:
    """Transmittance past one particle, detector offset ``o`` from it."""
    _check_g(g)
    return 1.0 - g * interval_probability(dist, o, r)


def _log_product(pv: np.ndarray, g: float) -> float:
    q = g * pv[pv > _NEGLIGIBLE_PV]
    if q.size == 0:
        return 1.0
    if np.any(q >= 1.0):
        return 0.0
    return float(math.exp(np.sum(np.log1p(-q))))


def product_tr(lattice: ParticleLattice, dist_shape: SpreadDistribution,
               r: float, g: float) -> float:
    """Non-local transmittance: product of per-chunk survival factors.

    Evaluates prod_k (1 - g * P_v(o_k)) over the lattice offsets, with the
    single distribution shape unfolded periodically across the chunks.
    """
    _check_g(g)
    _check_shape_centered(dist_shape)
    pv = interval_probability(dist_shape, lattice.offsets, r)
    return _log_product(np.atleast_1d(pv), g)


def mass_sum(lattice: ParticleLattice, dist_shape: SpreadDistribution, r: float) -> float:
    """Summed chunk probabilities S; S = 1 marks a closed (mass-retaining) system."""
    _check_shape_centered(dist_shape)
    pv = interval_probability(dist_shape, lattice.offsets, r)
    return float(np.sum(pv))


def pilotwave_tr(lattice: ParticleLattice, dist_shape: SpreadDistribution,
                 r: float, g: float) -> float:
    """Localized-absorber comparison model: linear coverage attenuation.

    Returns max(0, 1 - g * sum_k P_v(o_k)): the classical law while all
    probability mass stays within the lattice span, rising toward 1 only as
    mass leaks past it.
    """
    _check_g(g)
    return max(0.0, 1.0 - g * mass_sum(lattice, dist_shape, r))


def finite_k_limit(g: float, k: int) -> float:
    """Closed-system transmittance with the absorbed fraction split over k chunks."""
    if k < 1:
        raise ValueError(f"chunk count k must be >= 1, got {k}")
    _check_g(g)
    return (1.0 - g / k) ** k


def closed_limit(g: float) -> float:
    """Upper limit e^{-g} of closed-system transmittance growth."""
    _check_g(g)
    return math.exp(-g)


def square_detector_tr(grid_n: int, dist_shape: SpreadDistribution, r: float, g: float,
                       axis_offset_x: float = 0.0, axis_offset_y: float = 0.0) -> float:
    """Non-local transmittance for a square detector of side 2r.

    The projected cloud is unfolded to a grid_n x grid_n lattice with 2r
    spacing per axis; each 2D chunk probability is the product of the two
    1D interval probabilities, which requires a separable (Gaussian) shape.
    """
    if dist_shape.kind != "gaussian":
        raise ValueError("square detector unfolding supports only gaussian shapes "
                         f"(separability), got {dist_shape.kind!r}")
    _check_g(g)
    _check_shape_centered(dist_shape)
    if grid_n < 1:
        raise ValueError(f"grid_n must be >= 1, got {grid_n}")
    px = interval_probability(dist_shape, lattice_offsets(grid_n, r, axis_offset_x).offsets, r)
    py = interval_probability(dist_shape, lattice_offsets(grid_n, r, axis_offset_y).offsets, r)
    return _log_product(np.outer(px, py).ravel(), g)


@dataclass(frozen=True, eq=False)
class TransmittanceCurve:
    """Model transmittances over a stdev grid, plus the mass-retention sum."""

    stdev_grid: np.ndarray
    values: dict[str, np.ndarray]
    mass_sum: np.ndarray = field(default=None, repr=False)


def transmittance_curve(n: int, r: float, g: float, axis_offset: float,
                        stdev_grid, models=("nonlocal",)) -> TransmittanceCurve:
    """Evaluate the requested model variants over a grid of spreads.

    ``models`` may contain any of: nonlocal (chunk product), pilotwave
    (coverage sum), classic (constant 1 - g) and closed_limit (constant
    e^{-g}).  The mass sum S is always computed alongside.
    """
    grid = np.atleast_1d(np.asarray(stdev_grid, dtype=float))
    if grid.size == 0:
        raise ValueError("stdev grid must not be empty")
    if not np.all(grid > 0):
        raise ValueError("stdev grid values must be positive")
    if grid.size > 1 and not np.all(np.diff(grid) > 0):
        raise ValueError("stdev grid must be strictly increasing")
    models = tuple(models)
    if not models:
        raise ValueError("at least one model label is required")
    for m in models:
        if m not in MODELS:
            raise ValueError(f"unknown model {m!r}, expected one of {MODELS}")
    _check_g(g)

    lattice = lattice_offsets(n, r, axis_offset)
    nonlocal_v = np.empty(grid.size)
    pilot_v = np.empty(grid.size)
    s_v = np.empty(grid.size)
    for i, s in enumerate(grid):
        pv = interval_probability(SpreadDistribution.gaussian(s), lattice.offsets, r)
        pv = np.atleast_1d(pv)
        nonlocal_v[i] = _log_product(pv, g)
        s_v[i] = pv.sum()
        pilot_v[i] = max(0.0, 1.0 - g * s_v[i])

    values = {}
    for m in models:
        if m == "nonlocal":
            values[m] = nonlocal_v
        elif m == "pilotwave":
            values[m] = pilot_v
        elif m == "classic":
            values[m] = np.full(grid.size, 1.0 - g)
        else:
            values[m] = np.full(grid.size, math.exp(-g))
    return TransmittanceCurve(stdev_grid=grid, values=values, mass_sum=s_v)
