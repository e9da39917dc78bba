"""Spatially averaged SIR distributions for each zone and access scheme.

For a user at distance R from its reference FAP, Rayleigh fading on the
serving link turns the coverage probability into a product of Laplace
transforms: one for the single dominant cross-tier interferer (or for the
single cross-tier serving-link term), one for the PPP shot noise of all
other FAPs, ``exp(-lam C_alpha s^(2/alpha))``. Averaging that pointwise
CCDF over the zone (uniform users, radial density 2r/(r1^2 - r0^2)) gives
the CDFs below.

Two backends are provided for every zone:

``"quadrature"``
    adaptive Gauss-Kronrod over r = R^2, any (alpha, beta);
``"closed"``
    2F1 forms for Fo/closed and Fb (any exponents), exponential-integral
    forms for Fo/open (alpha = 4) and Fi/Fa ((alpha, beta) in {(4, 2), (4, 4)}).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import Callable

import numpy as np
from scipy import integrate

from .geometry import Zone, ZoneUndefinedError, zone_geometry
from .params import SystemParams, c_alpha
from .specfun import expint_ei_increment, hyp2f1_neg

QUAD_EPSABS = 1e-10
QUAD_EPSREL = 1e-12
QUAD_LIMIT = 200


class Access(str, Enum):
    CLOSED = "closed"
    OPEN = "open"
    NA = "na"  # zones whose SIR does not depend on the access scheme


def normalize_access(zone: Zone, access: Access | str | None) -> Access:
    access = Access(access) if access is not None else Access.NA
    if zone is Zone.O:
        if access is Access.NA:
            raise ValueError("zone Fo needs an access scheme (closed or open)")
        return access
    return Access.NA


# ---------------------------------------------------------------------------
# Pointwise CCDFs P[gamma(R) >= Gamma]
# ---------------------------------------------------------------------------
def link_constant(p: SystemParams, D: float, zone: Zone, access: Access) -> float:
    """The per-zone K that scales the cross-tier term in the SIR."""
    a = p.alpha
    if zone is Zone.O:
        # closed and open access share K; open access uses 1/K
        return p.P_f * p.L * D**a / p.P_c
    if zone in (Zone.I, Zone.A):
        return p.P_c * p.L / (p.P_f * D**a)
    if zone is Zone.B:
        return p.P_f * D**a / (p.P_c * p.L)
    raise ZoneUndefinedError(f"no SIR model for zone {zone}")


def pointwise_ccdf(p: SystemParams, D: float, zone: Zone, access: Access | str | None,
                   R, gamma):
    """Coverage probability P[SIR >= gamma] for a user at distance R from the FAP."""
    access = normalize_access(zone, access)
    K = link_constant(p, D, zone, access)
    lc = p.lam * c_alpha(p.alpha)
    R = np.asarray(R, dtype=float)
    g = np.asarray(gamma, dtype=float)
    a, b, L = p.alpha, p.beta, p.L
    if zone is Zone.O and access is Access.CLOSED:
        out = np.exp(-lc * (K * g) ** (2 / a)) / (g * K * R ** (-a) + 1.0)
    elif zone is Zone.O:
        out = np.exp(-lc * g ** (2 / a) * R**2) / (g / K * R**a + 1.0)
    elif zone in (Zone.I, Zone.A):
        out = np.exp(-lc * (L**2 * g) ** (2 / a) * R ** (2 * b / a)) / (K * g * R**b + 1.0)
    else:
        out = np.exp(-lc * (L**2 * K * g) ** (2 / a)) / (g * K * R ** (-b) + 1.0)
    return out[()] if out.ndim == 0 else out


# ---------------------------------------------------------------------------
# Exponential-integral primitives for alpha = 4
# ---------------------------------------------------------------------------
# below this |x y| the exponential is expanded to second order (error ~ |x y|^3 / 6)
SMALL_DECAY = 1e-5


def _moments(x: float, z: float) -> tuple[float, float, float, float]:
    # int_0^x t^k / (z t^2 + 1) dt for k = 0..3
    sz = math.sqrt(z)
    m0 = math.atan(sz * x) / sz
    m1 = math.log1p(z * x * x) / (2.0 * z)
    m2 = (x - m0) / z
    m3 = (x * x / 2.0 - m1) / z
    return m0, m1, m2, m3


def b_integral(x: float, y: float, z: float) -> float:
    """int_0^x e^(y t) / (z t^2 + 1) dt, y <= 0, z > 0."""
    sz = math.sqrt(z)
    if abs(x * y) < SMALL_DECAY:
        m0, m1, m2, _ = _moments(x, z)
        return m0 + y * m1 + 0.5 * y * y * m2
    w = y / sz
    d = expint_ei_increment(complex(0.0, w), x * y)  # Ei(xy + iw) - Ei(iw)
    return (d.real * math.sin(w) - d.imag * math.cos(w)) / sz


def h_integral(x: float, y: float, z: float) -> float:
    """int_0^x 2 t e^(y t) / (z t^2 + 1) dt, y <= 0, z > 0."""
    if abs(x * y) < SMALL_DECAY:
        _, m1, m2, m3 = _moments(x, z)
        return 2.0 * (m1 + y * m2 + 0.5 * y * y * m3)
    w = y / math.sqrt(z)
    d = expint_ei_increment(complex(0.0, w), x * y)
    return 2.0 / z * (d.real * math.cos(w) + d.imag * math.sin(w))


# ---------------------------------------------------------------------------
# Scalar CDF kernels
# ---------------------------------------------------------------------------
def _quad_mean(f: Callable[[float], float], r0: float, r1: float) -> float:
    """Average of f over [r0, r1] (f takes r = R^2)."""
    span = r1 - r0
    val, _ = integrate.quad(lambda t: f(r0 + t * span), 0.0, 1.0,
                            epsabs=QUAD_EPSABS, epsrel=QUAD_EPSREL, limit=QUAD_LIMIT)
    return val


# relative annulus width below which closed-form differences lose digits
THIN_ANNULUS = 1e-5


def _thin(r_in: float, r_out: float) -> bool:
    return r_out**2 - r_in**2 < THIN_ANNULUS * r_out**2


def _annulus_hyp_mean(s: float, r_in: float, r_out: float, kg: float) -> float:
    # mean over the annulus of 1/(kg R^-s + 1) using
    # int t/(a t^-s + 1) dt = t^2/2 (1 - 2F1(2/s,1;1+2/s;-t^s/a))
    area = r_out**2 - r_in**2
    num = (area + r_in**2 * hyp2f1_neg(s, r_in**s / kg)
           - r_out**2 * hyp2f1_neg(s, r_out**s / kg))
    return num / area


def _cdf_fo_closed(p, D, r_i, r_f, g, backend):
    K = link_constant(p, D, Zone.O, Access.CLOSED)
    shot = math.exp(-p.lam * c_alpha(p.alpha) * (K * g) ** (2 / p.alpha))
    if backend == "closed" and not _thin(r_i, r_f):
        mean = _annulus_hyp_mean(p.alpha, r_i, r_f, K * g)
    else:
        h = p.alpha / 2
        mean = _quad_mean(lambda r: 1.0 / (g * K * r ** (-h) + 1.0), r_i**2, r_f**2)
    return 1.0 - shot * mean


def _cdf_fo_open(p, D, r_i, r_f, g, backend):
    K = link_constant(p, D, Zone.O, Access.OPEN)
    lc = p.lam * c_alpha(p.alpha)
    r0, r1 = r_i**2, r_f**2
    if backend == "closed" and not _thin(r_i, r_f):
        y = -lc * math.sqrt(g)
        z = g / K
        mean = (b_integral(r1, y, z) - b_integral(r0, y, z)) / (r1 - r0)
    else:
        c = lc * g ** (2 / p.alpha)
        h = p.alpha / 2
        mean = _quad_mean(lambda r: math.exp(-c * r) / (g / K * r**h + 1.0), r0, r1)
    return 1.0 - mean


def _cdf_fi_disc(p, D, radius, g, backend):
    K = link_constant(p, D, Zone.I, Access.NA)
    lc = p.lam * c_alpha(p.alpha)
    if backend == "closed":
        y = -lc * p.L * math.sqrt(g)
        z = K * g
        if p.beta == 2.0:
            return 1.0 - h_integral(radius, y, z) / radius**2
        return 1.0 - b_integral(radius**2, y, z) / radius**2
    c = lc * (p.L**2 * g) ** (2 / p.alpha)
    e = p.beta / p.alpha
    h = p.beta / 2
    return 1.0 - _quad_mean(lambda r: math.exp(-c * r**e) / (K * g * r**h + 1.0),
                            0.0, radius**2)


def _cdf_fb(p, D, r_f, r_i, g, backend):
    K = link_constant(p, D, Zone.B, Access.NA)
    shot = math.exp(-p.lam * c_alpha(p.alpha) * (p.L**2 * K * g) ** (2 / p.alpha))
    if backend == "closed" and not _thin(r_f, r_i):
        mean = _annulus_hyp_mean(p.beta, r_f, r_i, K * g)
    else:
        h = p.beta / 2
        mean = _quad_mean(lambda r: 1.0 / (g * K * r ** (-h) + 1.0), r_f**2, r_i**2)
    return 1.0 - shot * mean


def closed_form_available(p: SystemParams, zone: Zone, access: Access) -> bool:
    if zone is Zone.B or (zone is Zone.O and access is Access.CLOSED):
        return True
    if zone is Zone.O:
        return p.alpha == 4.0
    if zone in (Zone.I, Zone.A):
        return p.alpha == 4.0 and p.beta in (2.0, 4.0)
    return False


# ---------------------------------------------------------------------------
# Public objects
# ---------------------------------------------------------------------------
@dataclass(frozen=True)
class SirCdf:
    """Evaluable CDF of the spatially averaged SIR in one zone."""

    params: SystemParams
    D: float
    zone: Zone
    access: Access = Access.NA
    backend: str = "auto"

    def __post_init__(self) -> None:
        object.__setattr__(self, "access", normalize_access(self.zone, self.access))
        if self.backend not in ("auto", "closed", "quadrature"):
            raise ValueError(f"unknown backend {self.backend!r}")
        if self.backend == "closed" and not closed_form_available(
                self.params, self.zone, self.access):
            raise ValueError(
                f"no closed form for zone {self.zone.value}/{self.access.value} at "
                f"alpha={self.params.alpha}, beta={self.params.beta}")
        # raises ZoneUndefinedError for a zone absent at this D
        self.radii

    @property
    def resolved_backend(self) -> str:
        if self.backend != "auto":
            return self.backend
        ok = closed_form_available(self.params, self.zone, self.access)
        return "closed" if ok else "quadrature"

    @property
    def radii(self) -> tuple[float, float]:
        return zone_geometry(self.params, self.D).radii(self.zone)

    def _scalar(self, g: float) -> float:
        if not g > 0:
            if g == 0:
                return 0.0
            raise ValueError("SIR threshold must be nonnegative")
        if math.isinf(g):
            return 1.0
        p, D, be = self.params, self.D, self.resolved_backend
        r0, r1 = self.radii
        if r1 <= r0:
            # zero-width annulus (Fb at D = D_th): the average tends to the boundary value
            return float(1.0 - pointwise_ccdf(p, D, self.zone, self.access, r1, g))
        if self.zone is Zone.O and self.access is Access.CLOSED:
            val = _cdf_fo_closed(p, D, r0, r1, g, be)
        elif self.zone is Zone.O:
            val = _cdf_fo_open(p, D, r0, r1, g, be)
        elif self.zone in (Zone.I, Zone.A):
            val = _cdf_fi_disc(p, D, r1, g, be)
        else:
            val = _cdf_fb(p, D, r0, r1, g, be)
        return min(1.0, max(0.0, val))

    def __call__(self, gamma):
        if np.ndim(gamma) == 0:
            return self._scalar(float(gamma))
        arr = np.asarray(gamma, dtype=float)
        return np.vectorize(self._scalar, otypes=[float])(arr)

    def ccdf(self, gamma):
        return 1.0 - self(gamma)


def zone_cdf(p: SystemParams, D: float, zone: Zone | str, access: Access | str | None = None,
             backend: str = "auto") -> SirCdf:
    zone = Zone(zone)
    if zone is Zone.MACRO:
        raise ZoneUndefinedError("no SIR model for macro-only users")
    return SirCdf(p, D, zone, normalize_access(zone, access), backend)


def disc_cdf(p: SystemParams, D: float, radius: float, gamma, backend: str = "auto"):
    """Indoor FAP-served CDF over a disc of arbitrary ``radius``.

    With ``radius = R_i`` this is the Fi distribution, with ``radius = R_f``
    the Fa one; no region check is made.
    """
    if backend == "auto":
        backend = "closed" if closed_form_available(p, Zone.I, Access.NA) else "quadrature"

    def one(g: float) -> float:
        if g == 0:
            return 0.0
        if math.isinf(g):
            return 1.0
        return min(1.0, max(0.0, _cdf_fi_disc(p, D, radius, g, backend)))

    if np.ndim(gamma) == 0:
        return one(float(gamma))
    return np.vectorize(one, otypes=[float])(np.asarray(gamma, dtype=float))


def cdf_Fo_closed(p: SystemParams, D: float, gamma, backend: str = "auto"):
    return SirCdf(p, D, Zone.O, Access.CLOSED, backend)(gamma)


def cdf_Fo_open(p: SystemParams, D: float, gamma, backend: str = "auto"):
    return SirCdf(p, D, Zone.O, Access.OPEN, backend)(gamma)


def cdf_Fi(p: SystemParams, D: float, gamma, backend: str = "auto"):
    return SirCdf(p, D, Zone.I, Access.NA, backend)(gamma)


def cdf_Fa(p: SystemParams, D: float, gamma, backend: str = "auto"):
    return SirCdf(p, D, Zone.A, Access.NA, backend)(gamma)


def cdf_Fb(p: SystemParams, D: float, gamma, backend: str = "auto"):
    return SirCdf(p, D, Zone.B, Access.NA, backend)(gamma)


def gamma_grid_db(start_db: float = -40.0, stop_db: float = 60.0, num: int = 201) -> np.ndarray:
    """Geometric SIR grid (returned in dB) used for CDF export."""
    return np.linspace(start_db, stop_db, num)
