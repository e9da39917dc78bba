"""System configuration and the constants derived from it.

Config documents use the flat key set below (powers in dBm, Shannon gap in
dB); :class:`SystemParams` keeps everything linear.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass
from pathlib import Path
from typing import Any, Mapping

CONFIG_KEYS = (
    "power_macro_dbm",
    "power_femto_dbm",
    "wall_loss_linear",
    "alpha",
    "beta",
    "radius_macro_m",
    "radius_indoor_m",
    "num_femtocells",
    "num_cellular_users",
    "num_home_users",
    "shannon_gap_db",
    "num_mod_levels",
    "qos_omega_c",
    "qos_omega_h",
    "qos_epsilon",
)

# Reference system. num_home_users has no canonical value;
# 1 is the smallest nondegenerate choice and is echoed in every output.
DEFAULT_CONFIG: dict[str, Any] = {
    "power_macro_dbm": 43.0,
    "power_femto_dbm": 13.0,
    "wall_loss_linear": 0.5,
    "alpha": 4.0,
    "beta": 4.0,
    "radius_macro_m": 500.0,
    "radius_indoor_m": 20.0,
    "num_femtocells": 20.0,
    "num_cellular_users": 20.0,
    "num_home_users": 1.0,
    "shannon_gap_db": 3.0,
    "num_mod_levels": 8,
    "qos_omega_c": 0.01,
    "qos_omega_h": 0.1,
    "qos_epsilon": 0.01,
}


class ConfigError(ValueError):
    """Raised for missing keys or physically invalid parameter values."""


def dbm_to_mw(p_dbm: float) -> float:
    return 10.0 ** (p_dbm / 10.0)


def db_to_linear(x_db: float) -> float:
    return 10.0 ** (x_db / 10.0)


@dataclass(frozen=True)
class SystemParams:
    """Validated physical configuration, all quantities linear.

    Powers are in mW, distances in meters, throughputs in bps/Hz.
    """

    P_c: float
    P_f: float
    L: float
    alpha: float
    beta: float
    R_c: float
    R_i: float
    N_f: float
    U_c: float
    U_h: float
    G: float
    N_levels: int
    Omega_c: float
    Omega_h: float
    epsilon: float

    def __post_init__(self) -> None:
        _validate(self)

    @property
    def kappa(self) -> float:
        return self.P_c / (self.P_f * self.L)

    @property
    def lam(self) -> float:
        """FAP density per square meter."""
        return self.N_f / (math.pi * self.R_c**2)

    def to_config(self) -> dict[str, Any]:
        """Inverse of :func:`load_params` (powers back to dBm)."""
        return {
            "power_macro_dbm": 10.0 * math.log10(self.P_c),
            "power_femto_dbm": 10.0 * math.log10(self.P_f),
            "wall_loss_linear": self.L,
            "alpha": self.alpha,
            "beta": self.beta,
            "radius_macro_m": self.R_c,
            "radius_indoor_m": self.R_i,
            "num_femtocells": self.N_f,
            "num_cellular_users": self.U_c,
            "num_home_users": self.U_h,
            "shannon_gap_db": 10.0 * math.log10(self.G),
            "num_mod_levels": self.N_levels,
            "qos_omega_c": self.Omega_c,
            "qos_omega_h": self.Omega_h,
            "qos_epsilon": self.epsilon,
        }


def _validate(p: SystemParams) -> None:
    for name in ("P_c", "P_f", "alpha", "beta", "R_c", "R_i", "N_f", "U_c", "U_h",
                 "G", "Omega_c", "Omega_h", "epsilon", "L"):
        if not math.isfinite(getattr(p, name)):
            raise ConfigError(f"{name} must be finite")
    if p.P_c <= 0 or p.P_f <= 0:
        raise ConfigError("transmit powers must be positive")
    if not 0.0 < p.L <= 1.0:
        raise ConfigError(f"wall loss must lie in (0, 1], got {p.L}")
    if p.alpha <= 2.0:
        raise ConfigError("outdoor pathloss exponent must exceed 2")
    # beta only shapes the indoor link; 2 is allowed (free-space-like homes)
    if p.beta < 2.0:
        raise ConfigError("indoor pathloss exponent must be >= 2")
    if not 0.0 < p.R_i < p.R_c:
        raise ConfigError("need 0 < radius_indoor_m < radius_macro_m")
    if p.N_f < 0:
        raise ConfigError("num_femtocells must be >= 0")
    if p.U_c <= 0:
        raise ConfigError("num_cellular_users must be positive")
    if p.U_h <= 0:
        raise ConfigError("num_home_users must be positive")
    if p.G <= 0:
        raise ConfigError("Shannon gap must be positive")
    if int(p.N_levels) != p.N_levels or p.N_levels < 1:
        raise ConfigError("num_mod_levels must be a positive integer")
    if p.Omega_c < 0 or p.Omega_h < 0:
        raise ConfigError("QoS minimum throughputs must be >= 0")
    if not 0.0 <= p.epsilon <= 1.0:
        raise ConfigError("qos_epsilon must lie in [0, 1]")
    if p.kappa <= 1.0:
        raise ConfigError(
            f"kappa = P_c/(P_f L) = {p.kappa:.6g} must exceed 1 "
            "(macrocell must dominate the wall-attenuated femtocell)"
        )


def load_params(source: Mapping[str, Any] | str | Path) -> SystemParams:
    """Build :class:`SystemParams` from a config mapping or a JSON file path.

    All keys in :data:`CONFIG_KEYS` are required; unknown keys are rejected
    so typos do not silently fall back to defaults.
    """
    if isinstance(source, (str, Path)):
        with open(source, encoding="utf-8") as fh:
            doc = json.load(fh)
    else:
        doc = dict(source)
    missing = [k for k in CONFIG_KEYS if k not in doc]
    if missing:
        raise ConfigError(f"missing config keys: {', '.join(missing)}")
    unknown = sorted(set(doc) - set(CONFIG_KEYS))
    if unknown:
        raise ConfigError(f"unknown config keys: {', '.join(unknown)}")
    try:
        levels = float(doc["num_mod_levels"])
        if not levels.is_integer():
            raise ConfigError(f"num_mod_levels must be an integer, got {levels}")
        return SystemParams(
            P_c=dbm_to_mw(float(doc["power_macro_dbm"])),
            P_f=dbm_to_mw(float(doc["power_femto_dbm"])),
            L=float(doc["wall_loss_linear"]),
            alpha=float(doc["alpha"]),
            beta=float(doc["beta"]),
            R_c=float(doc["radius_macro_m"]),
            R_i=float(doc["radius_indoor_m"]),
            N_f=float(doc["num_femtocells"]),
            U_c=float(doc["num_cellular_users"]),
            U_h=float(doc["num_home_users"]),
            G=db_to_linear(float(doc["shannon_gap_db"])),
            N_levels=int(levels),
            Omega_c=float(doc["qos_omega_c"]),
            Omega_h=float(doc["qos_omega_h"]),
            epsilon=float(doc["qos_epsilon"]),
        )
    except ConfigError:
        raise
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"bad config value: {exc}") from exc


def default_params(**overrides: Any) -> SystemParams:
    """Reference parameters, with optional config-key overrides."""
    doc = dict(DEFAULT_CONFIG)
    doc.update(overrides)
    return load_params(doc)


@dataclass(frozen=True)
class DerivedConstants:
    kappa: float
    lam: float
    C_alpha: float
    D_th: float
    N_f1: float
    N_f2: float
    K_geom: float

    def as_dict(self) -> dict[str, float]:
        return asdict(self)


def c_alpha(alpha: float) -> float:
    """Shot-noise constant (2 pi^2 / alpha) csc(2 pi / alpha)."""
    return 2.0 * math.pi**2 / alpha / math.sin(2.0 * math.pi / alpha)


def threshold_distance(p: SystemParams) -> float:
    """FAP-MBS distance at which the coverage radius equals the indoor radius."""
    k2 = p.kappa ** (2.0 / p.alpha)
    return p.R_i * abs(k2 - 1.0) / p.kappa ** (1.0 / p.alpha)


def derive_constants(p: SystemParams) -> DerivedConstants:
    k2 = p.kappa ** (2.0 / p.alpha)
    d_th = threshold_distance(p)
    inner_frac = (d_th / p.R_c) ** 2
    n_f1 = p.N_f * inner_frac
    return DerivedConstants(
        kappa=p.kappa,
        lam=p.lam,
        C_alpha=c_alpha(p.alpha),
        D_th=d_th,
        N_f1=n_f1,
        N_f2=p.N_f - n_f1,
        K_geom=k2 / (2.0 * p.R_i**2 * (k2 - 1.0) ** 2),
    )
