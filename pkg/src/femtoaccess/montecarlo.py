"""Monte Carlo simulator for the per-zone SIR distributions.

Each sample is one independent snapshot: a fresh PPP of interfering FAPs on a
disk centred on the user, a user position drawn uniformly in the zone, and
unit-mean exponential fading on every link. The reference FAP is not part of
the PPP (Slivnyak), and the MBS sits at distance D from the user, the same
far-field approximation the analytic distributions make.

Samples are produced in fixed-size batches. Batch ``k`` draws its PPP from
``SeedSequence(seed, spawn_key=(k, 0))`` and the user position and link fading
of each case from ``spawn_key=(k, 1, zone, access, bits of D)``. Results
therefore do not depend on how batches are scheduled across threads, nor on
which other cases are simulated alongside.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .geometry import Zone, zone_geometry
from .params import SystemParams
from .sir import Access, gamma_grid_db, normalize_access
from .throughput import rate_table

WINDOW_FACTOR = 10.0
DEFAULT_BATCH = 2048


def _default_grid() -> np.ndarray:
    return 10.0 ** (gamma_grid_db() / 10.0)


@dataclass(frozen=True)
class McConfig:
    """Simulation settings.

    ``window_radius=None`` means ``10 * R_c`` of whatever parameters it is
    used with. ``gamma_grid`` is linear SIR.
    """

    seed: int = 20240101
    n_drops: int = 100_000
    n_fading: int = 1
    window_radius: float | None = None
    gamma_grid: np.ndarray = field(default_factory=_default_grid)
    batch_size: int = DEFAULT_BATCH
    workers: int = 1

    def __post_init__(self) -> None:
        if not 0 <= int(self.seed) < 2**64:
            raise ValueError("seed must be a 64-bit unsigned integer")
        if self.n_drops < 1 or self.n_fading < 1 or self.batch_size < 1:
            raise ValueError("n_drops, n_fading and batch_size must be positive")
        if self.workers < 1:
            raise ValueError("workers must be positive")
        grid = np.asarray(self.gamma_grid, dtype=float)
        if grid.ndim != 1 or np.any(grid < 0) or np.any(np.diff(grid) <= 0):
            raise ValueError("gamma_grid must be a strictly increasing nonnegative 1-D array")
        object.__setattr__(self, "gamma_grid", grid)

    @property
    def n_samples(self) -> int:
        return self.n_drops * self.n_fading

    def window(self, p: SystemParams) -> float:
        w = WINDOW_FACTOR * p.R_c if self.window_radius is None else float(self.window_radius)
        if w < WINDOW_FACTOR * p.R_c * (1 - 1e-12):
            raise ValueError(f"window_radius must be >= {WINDOW_FACTOR:g} R_c")
        return w


@dataclass(frozen=True)
class McSample:
    """Per-sample channel draws and the resulting SIR.

    ``interference`` is the normalised PPP shot noise sum h_j |X_j|^-alpha;
    ``interferer_distances`` is only filled when requested (it is ragged).
    """

    R: np.ndarray
    g0: np.ndarray
    h0: np.ndarray
    interference: np.ndarray
    sir: np.ndarray
    interferer_distances: tuple[np.ndarray, ...] | None = None


def ppp_disk(rng: np.random.Generator, lam: float, radius: float) -> np.ndarray:
    """One PPP realisation on a disk centred at the origin, as an (n, 2) array."""
    n = rng.poisson(lam * math.pi * radius**2)
    r = radius * np.sqrt(1.0 - rng.random(n))
    theta = 2.0 * math.pi * rng.random(n)
    return np.column_stack((r * np.cos(theta), r * np.sin(theta)))


def shot_noise(rng: np.random.Generator, lam: float, alpha: float, radius: float, m: int,
               truncations: tuple[float, ...] = (), keep_distances: bool = False):
    """Sum of h_j |X_j|^-alpha over a PPP on a disk, for ``m`` independent snapshots.

    Returns an array of shape ``(1 + len(truncations), m)``: the full-window sum
    followed by sums restricted to |X_j| <= each truncation radius, all from the
    same points. With ``keep_distances`` the per-snapshot distances are also
    returned.
    """
    counts = rng.poisson(lam * math.pi * radius**2, size=m)
    total = int(counts.sum())
    # squared distance / radius^2 is uniform; 1 - U avoids a point on the user
    u = rng.random(total)
    np.subtract(1.0, u, out=u)
    h = rng.standard_exponential(total)
    if alpha == 4.0:
        contrib = np.multiply(u, u)
        np.divide(h, contrib, out=contrib)
    else:
        contrib = u ** (-alpha / 2.0)
        contrib *= h
    contrib *= radius ** (-alpha)
    out = np.zeros((1 + len(truncations), m))
    starts = np.cumsum(counts) - counts
    nonempty = counts > 0
    if total:
        out[0, nonempty] = np.add.reduceat(contrib, starts[nonempty])
        for k, rt in enumerate(truncations, start=1):
            w = np.where(u <= (rt / radius) ** 2, contrib, 0.0)
            out[k, nonempty] = np.add.reduceat(w, starts[nonempty])
    if keep_distances:
        dist = radius * np.sqrt(u)
        return out, tuple(np.split(dist, np.cumsum(counts)[:-1]))
    return out


def _zone_radii(p: SystemParams, D: float, zone: Zone) -> tuple[float, float]:
    r0, r1 = zone_geometry(p, D).radii(zone)
    if not r1 > r0:
        raise ValueError(f"zone {zone.value} has zero area at D={D:g} m")
    return r0, r1


def _assemble_sir(p: SystemParams, D: float, zone: Zone, access: Access,
                  R: np.ndarray, g0: np.ndarray, h0: np.ndarray, shot: np.ndarray) -> np.ndarray:
    a, b, L = p.alpha, p.beta, p.L
    macro = p.P_c * g0 * D ** (-a)
    if zone is Zone.O:
        femto_serving = p.P_f * L * h0 * R ** (-a)
        ppp = p.P_f * L * shot
        if access is Access.CLOSED:
            return macro / (femto_serving + ppp)
        return femto_serving / (macro + ppp)
    ppp = p.P_f * L**2 * shot
    femto_indoor = p.P_f * h0 * R ** (-b)
    if zone in (Zone.I, Zone.A):
        return femto_indoor / (L * macro + ppp)
    # Fb: indoor user served by the MBS through the wall
    return L * macro / (femto_indoor + ppp)


@dataclass(frozen=True)
class Case:
    """One (zone, access, D) combination to simulate."""

    zone: Zone
    access: Access
    D: float

    @classmethod
    def make(cls, zone: Zone | str, access: Access | str | None, D: float) -> "Case":
        zone = Zone(zone)
        return cls(zone, normalize_access(zone, access), float(D))

    def stream_key(self) -> tuple[int, ...]:
        # stable integer key so a case draws the same numbers alone or in a group
        zone_idx = list(Zone).index(self.zone)
        access_idx = list(Access).index(self.access)
        d_bits = int(np.float64(self.D).view(np.uint64))
        return (zone_idx, access_idx, d_bits)


def _batch(p: SystemParams, cases: list[Case], window: float, seed: int, index: int, m: int,
           truncations: tuple[float, ...], keep_distances: bool):
    shot_rng = np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(index, 0)))
    res = shot_noise(shot_rng, p.lam, p.alpha, window, m, truncations, keep_distances)
    shots, dists = res if keep_distances else (res, None)
    per_case = []
    for c in cases:
        rng = np.random.default_rng(
            np.random.SeedSequence(seed, spawn_key=(index, 1) + c.stream_key()))
        r0, r1 = _zone_radii(p, c.D, c.zone)
        R = np.sqrt(r0**2 + (r1**2 - r0**2) * (1.0 - rng.random(m)))
        g0 = rng.standard_exponential(m)
        h0 = rng.standard_exponential(m)
        sirs = np.stack([_assemble_sir(p, c.D, c.zone, c.access, R, g0, h0, s) for s in shots])
        per_case.append((R, g0, h0, sirs))
    return shots, per_case, dists


def _batch_sizes(mc: McConfig) -> list[int]:
    n = mc.n_samples
    full, rest = divmod(n, mc.batch_size)
    return [mc.batch_size] * full + ([rest] if rest else [])


def _run(p: SystemParams, mc: McConfig, cases: list[Case],
         truncations: tuple[float, ...] = (), keep_distances: bool = False):
    for c in cases:
        _zone_radii(p, c.D, c.zone)
    window = mc.window(p)
    jobs = [(p, cases, window, int(mc.seed), k, m, truncations, keep_distances)
            for k, m in enumerate(_batch_sizes(mc))]
    if mc.workers > 1:
        with ThreadPoolExecutor(mc.workers) as pool:
            parts = list(pool.map(lambda j: _batch(*j), jobs))
    else:
        parts = [_batch(*j) for j in jobs]
    # merge in batch order, whatever order the batches finished in
    shots = np.concatenate([q[0] for q in parts], axis=1)
    merged = []
    for i in range(len(cases)):
        R, g0, h0 = (np.concatenate([q[1][i][k] for q in parts]) for k in range(3))
        sirs = np.concatenate([q[1][i][3] for q in parts], axis=1)
        merged.append((R, g0, h0, sirs))
    dists = tuple(d for q in parts for d in q[2]) if keep_distances else None
    return shots, merged, dists


def simulate_cases(p: SystemParams, mc: McConfig, cases) -> list[McSample]:
    """Simulate several cases on shared PPP draws (each case is a valid estimate on its own)."""
    cases = [c if isinstance(c, Case) else Case.make(*c) for c in cases]
    shots, merged, _ = _run(p, mc, cases)
    return [McSample(R=R, g0=g0, h0=h0, interference=shots[0], sir=sirs[0])
            for R, g0, h0, sirs in merged]


def simulate(p: SystemParams, mc: McConfig, zone: Zone | str, access: Access | str | None,
             D: float, keep_distances: bool = False) -> McSample:
    """Draw ``mc.n_samples`` SIR samples for users of ``zone`` at FAP-MBS distance ``D``."""
    shots, merged, dists = _run(p, mc, [Case.make(zone, access, D)],
                                keep_distances=keep_distances)
    R, g0, h0, sirs = merged[0]
    return McSample(R=R, g0=g0, h0=h0, interference=shots[0], sir=sirs[0],
                    interferer_distances=dists)


def ecdf(samples: np.ndarray, grid: np.ndarray) -> np.ndarray:
    """Fraction of samples strictly below each grid value (P[SIR < gamma])."""
    s = np.sort(np.asarray(samples, dtype=float))
    return np.searchsorted(s, grid, side="left") / s.size


def empirical_cdf(p: SystemParams, mc: McConfig, zone: Zone | str,
                  access: Access | str | None, D: float) -> np.ndarray:
    """Empirical SIR CDF of ``zone`` evaluated on ``mc.gamma_grid``."""
    return ecdf(simulate(p, mc, zone, access, D).sir, mc.gamma_grid)


def truncation_cdfs(p: SystemParams, mc: McConfig, zone: Zone | str, access: Access | str | None,
                    D: float, inner_window: float) -> tuple[np.ndarray, np.ndarray]:
    """CDFs from the full window and from the same points cut at ``inner_window``.

    Coupling the two estimates isolates the truncation effect from sampling noise.
    """
    _, merged, _ = _run(p, mc, [Case.make(zone, access, D)], truncations=(inner_window,))
    sirs = merged[0][3]
    return ecdf(sirs[0], mc.gamma_grid), ecdf(sirs[1], mc.gamma_grid)


def empirical_zone_throughput(p: SystemParams, mc: McConfig, zone: Zone | str,
                              access: Access | str | None, D: float) -> float:
    """Mean adaptive-modulation rate over simulated SIR samples (bps/Hz)."""
    sir = simulate(p, mc, zone, access, D).sir
    return float(np.mean(rate_table(p).rate(sir)))


def sup_distance(a: np.ndarray, b: np.ndarray) -> float:
    return float(np.max(np.abs(np.asarray(a) - np.asarray(b))))
