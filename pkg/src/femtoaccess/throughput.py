"""Rate adaptation, per-zone average throughput and per-tier throughput.

Users are scheduled round robin with equal slots, so the throughput of a
group is the zone-average rate times the fraction of slots the group gets
from its serving station. The slot fractions come from expected user counts
(:func:`femtoaccess.geometry.user_counts`).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .geometry import Zone, user_counts
from .params import SystemParams, derive_constants
from .sir import Access, SirCdf


@dataclass(frozen=True)
class RateTable:
    """Discrete M-QAM ladder: SIR in [thresholds[n], thresholds[n+1]) gives rates[n]."""

    thresholds: np.ndarray
    rates: np.ndarray

    def __post_init__(self) -> None:
        if np.any(np.diff(self.thresholds) <= 0):
            raise ValueError("thresholds must be strictly increasing")

    @property
    def n_levels(self) -> int:
        return len(self.rates)

    def rate(self, sir):
        """Rate for each SIR value; 0 below the lowest threshold (outage)."""
        sir = np.asarray(sir, dtype=float)
        idx = np.searchsorted(self.thresholds, sir, side="right")
        padded = np.concatenate(([0.0], self.rates))
        out = padded[idx]
        return out[()] if out.ndim == 0 else out

    def average(self, cdf) -> float:
        """sum_n r_n [S(G_{n+1}) - S(G_n)] with S(G_{N+1}) = 1."""
        s = np.append(np.asarray(cdf(self.thresholds), dtype=float), 1.0)
        return float(np.sum(self.rates * (s[1:] - s[:-1])))


def build_rate_table(G: float, N: int) -> RateTable:
    """Thresholds G (2^n - 1) so that r_n = log2(1 + Gamma_n / G) = n."""
    if N < 1 or G <= 0:
        raise ValueError("need N >= 1 and G > 0")
    n = np.arange(1, N + 1, dtype=float)
    thresholds = G * (2.0**n - 1.0)
    rates = np.log2(1.0 + thresholds / G)
    return RateTable(thresholds, rates)


def rate_table(p: SystemParams) -> RateTable:
    return build_rate_table(p.G, p.N_levels)


def zone_throughput(p: SystemParams, D: float, zone: Zone | str,
                    access: Access | str | None = None, backend: str = "auto") -> float:
    """Spatially averaged throughput (bps/Hz) of one zone."""
    cdf = SirCdf(p, D, Zone(zone), access, backend)
    return rate_table(p).average(cdf)


@dataclass(frozen=True)
class ZoneThroughput:
    D: float
    T_a: float | None = None
    T_b: float | None = None
    T_i: float | None = None
    T_o_CA: float | None = None
    T_o_OA: float | None = None


def zone_throughputs(p: SystemParams, D: float, backend: str = "auto") -> ZoneThroughput:
    if D > derive_constants(p).D_th:
        return ZoneThroughput(
            D=D,
            T_i=zone_throughput(p, D, Zone.I, backend=backend),
            T_o_CA=zone_throughput(p, D, Zone.O, Access.CLOSED, backend),
            T_o_OA=zone_throughput(p, D, Zone.O, Access.OPEN, backend),
        )
    return ZoneThroughput(
        D=D,
        T_a=zone_throughput(p, D, Zone.A, backend=backend),
        T_b=zone_throughput(p, D, Zone.B, backend=backend),
    )


# ---------------------------------------------------------------------------
# Slot fractions
# ---------------------------------------------------------------------------
def _macro_load_closed(p: SystemParams) -> float:
    c = derive_constants(p)
    return p.U_c + c.N_f1 * p.U_h * (1.0 - c.K_geom * c.D_th**2)


def rho_b_closed(p: SystemParams, D: float) -> float:
    """Share of MBS slots for the Fb home users of one FAP, closed access."""
    c = derive_constants(p)
    if D > c.D_th:
        return 0.0
    return p.U_h * (1.0 - 2.0 * c.K_geom * D**2) / _macro_load_closed(p)


def rho_o(p: SystemParams, D: float) -> float:
    """Share of MBS slots for the Fo cellular users of one FAP, closed access."""
    c = derive_constants(p)
    if D <= c.D_th:
        return 0.0
    dom = p.R_c**2 - p.N_f * p.R_i**2
    return (p.U_c * p.R_i**2 * (2.0 * c.K_geom * D**2 - 1.0)
            / (dom * _macro_load_closed(p)))


def rho_b_open(p: SystemParams, D: float) -> float:
    """As :func:`rho_b_closed`, but the MBS has lost the users open FAPs took over."""
    c = derive_constants(p)
    if D > c.D_th:
        return 0.0
    dom = p.R_c**2 - p.N_f * p.R_i**2
    offloaded = c.N_f2 * (c.K_geom * (c.D_th**2 + p.R_c**2) - 1.0) * p.U_c * p.R_i**2 / dom
    return p.U_h * (1.0 - 2.0 * c.K_geom * D**2) / (_macro_load_closed(p) - offloaded)


def rho_i(p: SystemParams, D: float) -> float:
    """Share of FAP slots kept by home users under open access."""
    c = derive_constants(p)
    if D <= c.D_th:
        return 1.0
    dom = p.R_c**2 - p.N_f * p.R_i**2
    # U_o / U_i written out through R_f^2 = 2 K_geom R_i^2 D^2
    return 1.0 / (1.0 + p.U_c * p.R_i**2 * (2.0 * c.K_geom * D**2 - 1.0) / (p.U_h * dom))


def slot_fractions_from_counts(p: SystemParams, D: float) -> dict[str, float]:
    """Slot fractions as plain user-count ratios (independent of the closed forms)."""
    c = derive_constants(p)
    u = user_counts(p, D)
    load_ca = p.U_c + c.N_f1 * u.Ubar_b
    load_oa = load_ca - c.N_f2 * u.Ubar_o
    return {
        "rho_b_closed": u.U_b / load_ca,
        "rho_b_open": u.U_b / load_oa,
        "rho_o": u.U_o / load_ca,
        "rho_i": u.U_i / (u.U_i + u.U_o),
    }


# ---------------------------------------------------------------------------
# Per-tier throughput
# ---------------------------------------------------------------------------
@dataclass(frozen=True)
class TierThroughput:
    """Sum throughputs of one FAP's home users and neighbouring cellular users.

    ``T_c`` is None in the inner region, where no outdoor zone exists.
    ``T_c_per_user`` divides by the expected number of Fo users.
    """

    scheme: Access
    D: float
    T_h: float
    T_c: float | None
    rho: dict[str, float] = field(default_factory=dict)
    T_c_per_user: float | None = None

    @property
    def network(self) -> float:
        return self.T_h + (self.T_c or 0.0)


def _per_user(p: SystemParams, D: float, t_c: float) -> float | None:
    u_o = user_counts(p, D).U_o
    return t_c / u_o if u_o > 0 else None


def tier_throughput_closed(p: SystemParams, D: float, zt: ZoneThroughput | None = None,
                           backend: str = "auto") -> TierThroughput:
    zt = zt or zone_throughputs(p, D, backend)
    if D <= derive_constants(p).D_th:
        rb = rho_b_closed(p, D)
        return TierThroughput(Access.CLOSED, D, zt.T_a + rb * zt.T_b, None, {"rho_b": rb})
    ro = rho_o(p, D)
    t_c = ro * zt.T_o_CA
    return TierThroughput(Access.CLOSED, D, zt.T_i, t_c, {"rho_o": ro},
                          _per_user(p, D, t_c))


def tier_throughput_open(p: SystemParams, D: float, zt: ZoneThroughput | None = None,
                         backend: str = "auto") -> TierThroughput:
    zt = zt or zone_throughputs(p, D, backend)
    if D <= derive_constants(p).D_th:
        rb = rho_b_open(p, D)
        return TierThroughput(Access.OPEN, D, zt.T_a + rb * zt.T_b, None, {"rho_b": rb})
    ri = rho_i(p, D)
    t_c = (1.0 - ri) * zt.T_o_OA
    return TierThroughput(Access.OPEN, D, ri * zt.T_i, t_c, {"rho_i": ri},
                          _per_user(p, D, t_c))


def network_throughput(p: SystemParams, D: float, zt: ZoneThroughput | None = None) -> dict[str, float]:
    """Closed- and open-access network throughput (home + neighbouring cellular)."""
    zt = zt or zone_throughputs(p, D)
    return {
        "closed": tier_throughput_closed(p, D, zt).network,
        "open": tier_throughput_open(p, D, zt).network,
    }


def throughput_gap_identity(p: SystemParams, D: float, zt: ZoneThroughput | None = None) -> tuple[float, float]:
    """(T_CA - T_OA, (1 - rho_i)(T_i - T_o_OA) + rho_o T_o_CA) for D > D_th."""
    zt = zt or zone_throughputs(p, D)
    net = network_throughput(p, D, zt)
    ri, ro = rho_i(p, D), rho_o(p, D)
    rhs = (1.0 - ri) * (zt.T_i - zt.T_o_OA) + ro * zt.T_o_CA
    return net["closed"] - net["open"], rhs


def is_finite_fraction(x: float) -> bool:
    return math.isfinite(x) and -1e-12 <= x <= 1.0 + 1e-12
