"""Femtocell coverage geometry, zone classification and zone user counts.

The coverage border of a FAP at distance D from the MBS is the circle on
which the long-term received powers from both stations are equal. Its center
sits a factor k2/(k2 - 1) (k2 = kappa^(2/alpha)) further out than the FAP;
for realistic powers that factor is ~1 and the center is taken to be the FAP.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

from .params import SystemParams, derive_constants, threshold_distance


class Zone(str, Enum):
    A = "Fa"  # indoor, FAP-served, inner region (disc R_f)
    B = "Fb"  # indoor, MBS-served, inner region (annulus R_f..R_i)
    I = "Fi"  # indoor, outer region (disc R_i)
    O = "Fo"  # outdoor, within femto coverage, outer region (annulus R_i..R_f)
    MACRO = "macro"  # outdoor beyond the femtocell coverage


class Region(str, Enum):
    INNER = "inner"
    OUTER = "outer"


class ZoneUndefinedError(ValueError):
    """The requested zone does not exist for this FAP-MBS distance."""


@dataclass(frozen=True)
class ZoneGeometry:
    D: float
    R_f: float
    region: Region
    center_offset_factor: float
    R_i: float

    def radii(self, zone: Zone) -> tuple[float, float]:
        """(inner, outer) radius of ``zone`` around the FAP."""
        outer = self.region is Region.OUTER
        if zone is Zone.I and outer:
            return 0.0, self.R_i
        if zone is Zone.O and outer:
            return self.R_i, self.R_f
        if zone is Zone.A and not outer:
            return 0.0, self.R_f
        if zone is Zone.B and not outer:
            return self.R_f, self.R_i
        raise ZoneUndefinedError(
            f"zone {zone.value} does not exist at D={self.D:g} m ({self.region.value} region)"
        )

    def area(self, zone: Zone) -> float:
        r0, r1 = self.radii(zone)
        return math.pi * (r1**2 - r0**2)


def center_offset_factor(p: SystemParams) -> float:
    k2 = p.kappa ** (2.0 / p.alpha)
    return k2 / (k2 - 1.0)


def coverage_radius(p: SystemParams, D: float) -> float:
    """Radius of the equal-power circle around a FAP at distance ``D``."""
    if D < 0:
        raise ValueError("distance must be nonnegative")
    k2 = p.kappa ** (2.0 / p.alpha)
    return p.kappa ** (1.0 / p.alpha) * D / abs(k2 - 1.0)


def coverage_center(p: SystemParams, D: float) -> float:
    """x-coordinate of the exact coverage-circle center (MBS at origin, FAP at (D, 0))."""
    return center_offset_factor(p) * D


def zone_geometry(p: SystemParams, D: float) -> ZoneGeometry:
    if D <= 0:
        raise ValueError("distance must be positive")
    r_f = coverage_radius(p, D)
    region = Region.OUTER if D > threshold_distance(p) else Region.INNER
    return ZoneGeometry(D=D, R_f=r_f, region=region,
                        center_offset_factor=center_offset_factor(p), R_i=p.R_i)


def classify_zone(p: SystemParams, D: float, r: float, indoor: bool) -> Zone:
    """Zone of a user at distance ``r`` from a FAP that sits ``D`` from the MBS.

    Indoor users are assumed to be within the home (``r <= R_i``). Users on
    a boundary go to the FAP-served side.
    """
    g = zone_geometry(p, D)
    if indoor:
        if r > p.R_i:
            raise ValueError("indoor user outside the home radius")
        if g.region is Region.OUTER:
            return Zone.I
        return Zone.A if r <= g.R_f else Zone.B
    if g.region is Region.OUTER and p.R_i <= r <= g.R_f:
        return Zone.O
    return Zone.MACRO


@dataclass(frozen=True)
class UserCounts:
    """Expected user populations attached to one FAP (real-valued).

    U_b and U_o refer to the FAP at the given distance; the barred values
    average over a FAP placed uniformly in the inner (U_b) or outer (U_o)
    region.
    """

    U_a: float
    U_b: float
    U_i: float
    U_o: float
    Ubar_b: float
    Ubar_o: float


def _cellular_domain(p: SystemParams) -> float:
    denom = p.R_c**2 - p.N_f * p.R_i**2
    if denom <= 0:
        raise ValueError(
            "R_c^2 - N_f R_i^2 <= 0: homes would cover the whole cell, "
            "no area left for outdoor users"
        )
    return denom


def user_counts(p: SystemParams, D: float) -> UserCounts:
    """User counts per zone for a FAP at distance ``D``.

    U_b = U_h (1 - (R_f/R_i)^2) for D <= D_th, U_o = U_c (R_f^2 - R_i^2) /
    (R_c^2 - N_f R_i^2) for D > D_th; the zone that does not exist gets 0.
    """
    if D < 0:
        raise ValueError("distance must be nonnegative")
    c = derive_constants(p)
    denom = _cellular_domain(p)
    r_f = coverage_radius(p, D)
    if D <= c.D_th:
        u_b = p.U_h * (1.0 - (r_f / p.R_i) ** 2)
        u_a = p.U_h - u_b
        u_o = 0.0
        u_i = p.U_h
    else:
        u_b = 0.0
        u_a = 0.0
        u_o = p.U_c * (r_f**2 - p.R_i**2) / denom
        u_i = p.U_h
    # E[D^2] = D_th^2 / 2 over the inner disc, (R_c^2 + D_th^2) / 2 over the outer annulus
    rf2_per_d2 = (coverage_radius(p, 1.0)) ** 2
    ubar_b = p.U_h * (1.0 - rf2_per_d2 * c.D_th**2 / 2.0 / p.R_i**2)
    ubar_o = p.U_c * (rf2_per_d2 * (p.R_c**2 + c.D_th**2) / 2.0 - p.R_i**2) / denom
    return UserCounts(U_a=u_a, U_b=u_b, U_i=u_i, U_o=u_o, Ubar_b=ubar_b, Ubar_o=ubar_o)
