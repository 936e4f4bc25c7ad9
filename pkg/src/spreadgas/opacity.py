"""Conversions among the four classical opacity representations.

A cloud's classical opacity can be stated as an absorbed fraction ``g``,
a classical transmittance ``tr_cl``, an optical depth ``tau`` or an
absorbance ``abs``.  All four are stored eagerly so consistency is a
direct assertion, and a fully opaque cloud (``g = 1``) maps to infinite
``tau`` and ``abs``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable

_LN10 = math.log(10.0)

KINDS = ("g", "tr_cl", "tau", "abs")


@dataclass(frozen=True)
class OpacitySpec:
    """One classical opacity in all four equivalent representations."""

    g: float
    tr_cl: float
    tau: float
    abs: float

    def value(self, kind: str) -> float:
        """Return the representation named by ``kind``."""
        if kind not in KINDS:
            raise ValueError(f"unknown opacity kind {kind!r}, expected one of {KINDS}")
        return getattr(self, kind)

    def to_json_dict(self) -> dict:
        return {"g": self.g, "tr_cl": self.tr_cl, "tau": self.tau, "abs": self.abs}


def _from_tr_cl(tr_cl: float) -> OpacitySpec:
    g = 1.0 - tr_cl
    if tr_cl == 0.0:
        return OpacitySpec(g=1.0, tr_cl=0.0, tau=math.inf, abs=math.inf)
    return OpacitySpec(g=g, tr_cl=tr_cl, tau=-math.log(tr_cl), abs=-math.log10(tr_cl))


def make_opacity(kind: str, value: float) -> OpacitySpec:
    """Build a mutually consistent :class:`OpacitySpec` from one representation.

    Valid ranges: ``g`` in (0, 1], ``tr_cl`` in [0, 1), ``tau`` and ``abs``
    positive (possibly infinite).  Values implying a fully transparent cloud
    (``g = 0``) are rejected.
    """
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ValueError(f"opacity value must be a real number, got {value!r}")
    value = float(value)
    if math.isnan(value):
        raise ValueError("opacity value must not be NaN")

    if kind == "g":
        if not 0.0 < value <= 1.0:
            raise ValueError(f"g must satisfy 0 < g <= 1, got {value}")
        return _from_tr_cl(1.0 - value)
    if kind == "tr_cl":
        if not 0.0 <= value < 1.0:
            raise ValueError(f"tr_cl must satisfy 0 <= tr_cl < 1, got {value}")
        return _from_tr_cl(value)
    if kind == "tau":
        if not value > 0.0:
            raise ValueError(f"tau must be positive (g must exceed 0), got {value}")
        if math.isinf(value):
            return _from_tr_cl(0.0)
        # expm1 keeps g accurate for small tau
        return OpacitySpec(g=-math.expm1(-value), tr_cl=math.exp(-value),
                           tau=value, abs=value / _LN10)
    if kind == "abs":
        if not value > 0.0:
            raise ValueError(f"abs must be positive (g must exceed 0), got {value}")
        if math.isinf(value):
            return _from_tr_cl(0.0)
        tau = value * _LN10
        return OpacitySpec(g=-math.expm1(-tau), tr_cl=math.exp(-tau),
                           tau=tau, abs=value)
    raise ValueError(f"unknown opacity kind {kind!r}, expected one of {KINDS}")


def compose_layers(specs: Iterable[OpacitySpec]) -> OpacitySpec:
    """Stack layers: transmittances multiply, optical depths add."""
    specs = list(specs)
    if not specs:
        raise ValueError("compose_layers requires at least one layer")
    if any(math.isinf(s.tau) for s in specs):
        return _from_tr_cl(0.0)
    # fsum makes the composition exactly order-independent
    return make_opacity("tau", math.fsum(s.tau for s in specs))
