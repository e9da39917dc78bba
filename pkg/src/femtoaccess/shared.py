"""Shared access: split FAP time slots between home and neighbouring users.

A FAP gives a fraction ``eta`` of its slots to its home users and the rest to
the cellular users inside its coverage, choosing ``eta`` to maximise

    T_SA(eta) = eta T_i + (1 - eta) T_o_OA

subject to per-user minimum throughputs and a fairness floor
``Tbar_c >= epsilon Tbar_h``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .geometry import user_counts
from .params import SystemParams, derive_constants
from .throughput import ZoneThroughput, network_throughput, zone_throughputs

FEASIBILITY_SLACK = 1e-9


@dataclass(frozen=True)
class SharingInputs:
    T_i: float
    T_o: float  # open-access Fo throughput
    U_i: float
    U_o: float
    Omega_c: float
    Omega_h: float
    epsilon: float

    def objective(self, eta):
        return eta * self.T_i + (1.0 - eta) * self.T_o

    def per_user(self, eta) -> tuple[float, float]:
        """(Tbar_h, Tbar_c) at slot fraction ``eta``."""
        t_h = eta * self.T_i / self.U_i
        t_c = (1.0 - eta) * self.T_o / self.U_o if self.U_o > 0 else math.inf
        return t_h, t_c


@dataclass(frozen=True)
class SharedAccessResult:
    eta_star: float
    feasible: bool
    T_network: float
    Tbar_h: float | None
    Tbar_c: float | None
    binding: str
    method: str = "closed-form"
    premise_ok: bool = True


def _upper_bounds(s: SharingInputs) -> tuple[float, float]:
    # cellular minimum rate: (1 - eta) T_o / U_o >= Omega_c
    if s.T_o > 0:
        q_c = 1.0 - s.Omega_c * s.U_o / s.T_o
        q_f = 1.0 / (1.0 + s.epsilon * s.U_o * s.T_i / (s.U_i * s.T_o))
    else:
        q_c = 1.0 if s.Omega_c == 0 else -math.inf
        q_f = 1.0 if s.epsilon == 0 else 0.0
    return q_c, q_f


def _result(s: SharingInputs, eta: float, feasible: bool, binding: str, method: str,
            premise_ok: bool) -> SharedAccessResult:
    t_h, t_c = s.per_user(eta)
    return SharedAccessResult(
        eta_star=eta,
        feasible=feasible,
        T_network=float(s.objective(eta)),
        Tbar_h=t_h,
        Tbar_c=t_c,
        binding=binding,
        method=method,
        premise_ok=premise_ok,
    )


def solve_eta(s: SharingInputs, resolution: float = 1e-4) -> SharedAccessResult:
    """Optimal slot fraction from the two upper bounds and one lower bound.

    The objective is affine with slope T_i - T_o, so when home users are the
    better-served group the optimum is the largest feasible ``eta``. When that
    premise fails, :func:`grid_search` is used instead and ``premise_ok`` is
    False.
    """
    if s.T_i <= s.T_o:
        res = grid_search(s, resolution)
        return SharedAccessResult(**{**res.__dict__, "premise_ok": False})
    q_c, q_f = _upper_bounds(s)
    eta = min(q_c, q_f)
    lower = s.Omega_h * s.U_i / s.T_i
    if eta < lower or eta < 0.0:
        # the home-user minimum cannot be met together with the other two
        eta_rep = min(max(eta, 0.0), 1.0)
        return _result(s, eta_rep, False, "omega_h", "closed-form", True)
    if q_c >= 1.0 and q_f >= 1.0:
        binding = "none"
    else:
        binding = "omega_c" if q_c <= q_f else "fairness"
    return _result(s, eta, True, binding, "closed-form", True)


def grid_search(s: SharingInputs, resolution: float = 1e-3) -> SharedAccessResult:
    """Exhaustive scan of eta in [0, 1], checking each QoS constraint directly."""
    if resolution < 1e-4:
        raise ValueError("resolution must be >= 1e-4")
    n = int(round(1.0 / resolution))
    eta = np.linspace(0.0, 1.0, n + 1)
    t_h = eta * s.T_i / s.U_i
    if s.U_o > 0:
        t_c = (1.0 - eta) * s.T_o / s.U_o
    else:
        t_c = np.full_like(eta, math.inf)
    slack = FEASIBILITY_SLACK
    ok_c = t_c >= s.Omega_c - slack
    ok_h = t_h >= s.Omega_h - slack
    ok_f = t_c >= s.epsilon * t_h - slack
    ok = ok_c & ok_h & ok_f
    if not ok.any():
        violated = "omega_h" if (ok_c & ok_f).any() else ("omega_c" if not ok_c.any() else "fairness")
        return _result(s, float("nan"), False, violated, "grid", s.T_i > s.T_o)
    obj = np.where(ok, s.objective(eta), -np.inf)
    best = float(obj.max())
    # among ties keep the largest eta (favours home users when the slope is 0)
    k = int(np.flatnonzero(obj >= best)[-1])
    e = float(eta[k])
    if k < n and not ok[k + 1]:
        binding = ("omega_c" if not ok_c[k + 1] else
                   "fairness" if not ok_f[k + 1] else "omega_h")
    else:
        binding = "none"
    return _result(s, e, True, binding, "grid", s.T_i > s.T_o)


def sharing_inputs(p: SystemParams, D: float, zt: ZoneThroughput | None = None) -> SharingInputs:
    zt = zt or zone_throughputs(p, D)
    u = user_counts(p, D)
    return SharingInputs(T_i=zt.T_i, T_o=zt.T_o_OA, U_i=u.U_i, U_o=u.U_o,
                         Omega_c=p.Omega_c, Omega_h=p.Omega_h, epsilon=p.epsilon)


def _inner_region(p: SystemParams, D: float, zt: ZoneThroughput | None) -> SharedAccessResult:
    # no outdoor coverage to share: shared access coincides with open access
    t = network_throughput(p, D, zt)["open"]
    return SharedAccessResult(eta_star=1.0, feasible=True, T_network=t, Tbar_h=None,
                              Tbar_c=None, binding="none", method="inner-region")


def optimal_eta(p: SystemParams, D: float, zt: ZoneThroughput | None = None) -> SharedAccessResult:
    if D <= derive_constants(p).D_th:
        return _inner_region(p, D, zt)
    return solve_eta(sharing_inputs(p, D, zt))


def grid_search_eta(p: SystemParams, D: float, resolution: float = 1e-3,
                    zt: ZoneThroughput | None = None) -> SharedAccessResult:
    if D <= derive_constants(p).D_th:
        return _inner_region(p, D, zt)
    return grid_search(sharing_inputs(p, D, zt), resolution)
