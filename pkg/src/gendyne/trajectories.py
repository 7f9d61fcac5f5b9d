"""Stochastic simulation of monitored (and driven) Gaussian systems.

The conditional means diffuse,

    d<R> = A <R> dt + (sigma_c C^T + Gamma^T) dw,

while the conditional CM follows the noise-free Riccati flow shared by the
whole ensemble. A record-proportional drive B y(t), with
y dt = C <R> dt + dw, shifts the mean dynamics to

    d<R> = (A + B C) <R> dt + (sigma_c C^T + Gamma^T + B) dw,

so the cancelling gain B = -(sigma_c C^T + Gamma^T) removes the noise at
steady state. Integration is Euler-Maruyama for the means (the noise is
additive given sigma_c) and classical 4th-order Runge-Kutta for the
deterministic CM path.

Noise streams are counter-based: trajectory i draws from
Philox(seed, stream=i), so ensembles are reproducible bit-for-bit and
independent of execution order or chunking.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import NamedTuple, Optional

import numpy as np

from .conditioning import MeasurementSetup, riccati_rhs
from .dynamics import DriftDiffusion, stability_check
from .feedback import FeedbackLaw
from .linalg import symmetrize
from .symplectic import as_matrix

# Fixed so that results do not depend on memory layout: trajectories are
# processed in chunks, noise is drawn per chunk in blocks of time steps.
_TRAJ_CHUNK = 1024
_STEP_BLOCK = 2048


@dataclass(frozen=True)
class TrajectoryConfig:
    """Grid, ensemble size and seeding for a stochastic run."""

    dt: float
    horizon: float
    n_traj: int
    seed: int
    record_stride: int = 1
    record_currents: bool = False

    def __post_init__(self) -> None:
        if self.dt <= 0:
            raise ValueError("dt must be positive")
        if self.horizon < self.dt:
            raise ValueError("horizon must cover at least one step")
        if self.n_traj < 1:
            raise ValueError("need at least one trajectory")
        if self.record_stride < 1:
            raise ValueError("record_stride must be >= 1")
        if not 0 <= int(self.seed) < 2**64:
            raise ValueError("seed must fit in 64 bits")

    @property
    def n_steps(self) -> int:
        return int(round(self.horizon / self.dt))


@dataclass(frozen=True)
class TrajectoryRecord:
    """Sampled ensemble output.

    times has S entries; means is (n_traj, S, 2n); sigma_c_path is
    (S, 2n, 2n) and identical for every trajectory of the ensemble (the CM
    flow carries no noise); currents, when recorded, holds every per-step
    increment y*dt with shape (n_traj, n_steps, 2L).
    """

    times: np.ndarray = field(repr=False)
    means: np.ndarray = field(repr=False)
    sigma_c_path: np.ndarray = field(repr=False)
    currents: Optional[np.ndarray] = field(repr=False, default=None)

    @property
    def n_traj(self) -> int:
        return self.means.shape[0]


def default_burn_in(dd: DriftDiffusion) -> float:
    """Default stationary-window start: ten relaxation times of the slowest mode."""
    stability = stability_check(dd)
    if not stability.stable:
        raise ValueError("burn-in is defined for stable systems only")
    return 10.0 / float(stability.alphas[0])


def _trajectory_generator(seed: int, index: int) -> np.random.Generator:
    """Counter-based stream for one trajectory, independent of all others."""
    return np.random.Generator(
        np.random.Philox(np.random.SeedSequence(entropy=int(seed), spawn_key=(int(index),)))
    )


def _integrate_sigma_path(
    dd: DriftDiffusion, m: MeasurementSetup, sigma0: np.ndarray, n_steps: int, dt: float
) -> np.ndarray:
    """RK4 path of the conditional CM on the full step grid (n_steps+1 entries)."""
    path = np.empty((n_steps + 1,) + sigma0.shape)
    sigma = sigma0.copy()
    path[0] = sigma
    for k in range(n_steps):
        k1 = riccati_rhs(sigma, dd, m)
        k2 = riccati_rhs(sigma + 0.5 * dt * k1, dd, m)
        k3 = riccati_rhs(sigma + 0.5 * dt * k2, dd, m)
        k4 = riccati_rhs(sigma + dt * k3, dd, m)
        sigma = symmetrize(sigma + (dt / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4))
        path[k + 1] = sigma
    return path


def _simulate(
    dd: DriftDiffusion,
    m: MeasurementSetup,
    b: Optional[np.ndarray],
    sigma_c0,
    r0,
    cfg: TrajectoryConfig,
) -> TrajectoryRecord:
    dim = dd.a.shape[0]
    n_out = m.c.shape[0]
    n_steps = cfg.n_steps
    dt = cfg.dt
    sqrt_dt = np.sqrt(dt)

    sigma0 = symmetrize(as_matrix(sigma_c0))
    r0 = np.asarray(r0, dtype=float).reshape(dim)

    sigma_path = _integrate_sigma_path(dd, m, sigma0, n_steps, dt)
    # Noise gains per step (left-point rule): sigma_c C^T + Gamma^T (+ B).
    gains = sigma_path[:-1] @ m.c.T + m.gamma.T
    drift = dd.a if b is None else dd.a + b @ m.c
    if b is not None:
        gains = gains + b

    sample_steps = np.arange(0, n_steps + 1, cfg.record_stride)
    times = sample_steps * dt
    means = np.empty((cfg.n_traj, len(sample_steps), dim))
    currents = None
    if cfg.record_currents:
        if cfg.n_traj * n_steps * n_out > 2 * 10**8:
            raise ValueError(
                "current record would be too large; disable record_currents"
            )
        currents = np.empty((cfg.n_traj, n_steps, n_out))

    step_map = np.full(n_steps + 1, -1)
    step_map[sample_steps] = np.arange(len(sample_steps))
    prop = np.eye(dim) + dt * drift.T  # Euler-Maruyama one-step propagator

    for start in range(0, cfg.n_traj, _TRAJ_CHUNK):
        stop = min(start + _TRAJ_CHUNK, cfg.n_traj)
        gens = [_trajectory_generator(cfg.seed, i) for i in range(start, stop)]
        r = np.tile(r0, (stop - start, 1))
        if step_map[0] >= 0:
            means[start:stop, 0] = r
        for block_start in range(0, n_steps, _STEP_BLOCK):
            block = min(_STEP_BLOCK, n_steps - block_start)
            noise = np.stack([g.standard_normal((block, n_out)) for g in gens]) * sqrt_dt
            for j in range(block):
                k = block_start + j
                dw = noise[:, j, :]
                if currents is not None:
                    currents[start:stop, k] = r @ m.c.T * dt + dw
                r = r @ prop + dw @ gains[k].T
                idx = step_map[k + 1]
                if idx >= 0:
                    means[start:stop, idx] = r
        if not np.all(np.isfinite(r)):
            raise FloatingPointError(
                f"trajectory means diverged (chunk starting at {start})"
            )

    return TrajectoryRecord(times, means, sigma_path[sample_steps], currents)


def simulate_conditional(
    dd: DriftDiffusion,
    m: MeasurementSetup,
    sigma_c0,
    r0,
    cfg: TrajectoryConfig,
) -> TrajectoryRecord:
    """Ensemble of conditional trajectories without driving."""
    return _simulate(dd, m, None, sigma_c0, r0, cfg)


def simulate_closed_loop(
    dd: DriftDiffusion,
    m: MeasurementSetup,
    fb: FeedbackLaw,
    cfg: TrajectoryConfig,
    sigma_c0,
    r0=None,
) -> TrajectoryRecord:
    """Ensemble of trajectories with the record fed back as linear driving."""
    if r0 is None:
        r0 = np.zeros(dd.a.shape[0])
    return _simulate(dd, m, fb.b, sigma_c0, r0, cfg)


def mean_spread_model(
    dd: DriftDiffusion,
    m: MeasurementSetup,
    b: Optional[np.ndarray],
    sigma_c0,
    cfg: TrajectoryConfig,
) -> tuple[np.ndarray, np.ndarray]:
    """Deterministic second moments of the conditional means, tau(t).

    Runs the exact discrete recursion of the Euler-Maruyama ensemble,
    tau_{k+1} = P tau_k P^T + dt G_k G_k^T with P = 1 + dt A_eff, so sampled
    spreads differ from it by Monte-Carlo error only. Returns (times, tau
    path) on the record grid, for an ensemble started at a fixed mean.
    """
    dim = dd.a.shape[0]
    n_steps = cfg.n_steps
    sigma0 = symmetrize(as_matrix(sigma_c0))
    sigma_path = _integrate_sigma_path(dd, m, sigma0, n_steps, cfg.dt)
    gains = sigma_path[:-1] @ m.c.T + m.gamma.T
    drift = dd.a if b is None else dd.a + b @ m.c
    if b is not None:
        gains = gains + b
    prop = np.eye(dim) + cfg.dt * drift
    tau = np.zeros((dim, dim))
    sample_steps = np.arange(0, n_steps + 1, cfg.record_stride)
    step_map = np.full(n_steps + 1, -1)
    step_map[sample_steps] = np.arange(len(sample_steps))
    path = np.empty((len(sample_steps), dim, dim))
    if step_map[0] >= 0:
        path[0] = tau
    for k in range(n_steps):
        tau = prop @ tau @ prop.T + cfg.dt * gains[k] @ gains[k].T
        idx = step_map[k + 1]
        if idx >= 0:
            path[idx] = symmetrize(tau)
    return sample_steps * cfg.dt, path


class EnsembleStats(NamedTuple):
    mean: np.ndarray
    tau: np.ndarray  # classical covariance of the conditional means
    sigma: np.ndarray  # reconstructed average CM: window-mean sigma_c + tau
    sigma_c: np.ndarray
    se_mean: np.ndarray
    se_sigma: np.ndarray
    n_samples: int


def ensemble_statistics(
    records: list[TrajectoryRecord] | TrajectoryRecord,
    window: tuple[float, float],
    n_batches: int = 16,
) -> EnsembleStats:
    """Stationary moments over ensemble x window, with batch-means errors.

    The ensemble is split into `n_batches` groups of trajectories; the
    spread of the per-batch statistics gives the standard errors (the CM
    path is deterministic, so only the mean-fluctuation part contributes).
    """
    if isinstance(records, TrajectoryRecord):
        records = [records]
    if not records:
        raise ValueError("no records given")
    t1, t2 = window
    base_times = records[0].times
    for rec in records[1:]:
        if rec.times.shape != base_times.shape or not np.allclose(rec.times, base_times):
            raise ValueError("records must share a common sample grid")
    mask = (base_times >= t1) & (base_times <= t2)
    if not np.any(mask):
        raise ValueError(f"no samples inside window [{t1}, {t2}]")

    pool = np.concatenate([rec.means[:, mask, :] for rec in records], axis=0)
    n_traj, n_t, dim = pool.shape
    flat = pool.reshape(n_traj * n_t, dim)
    mean = flat.mean(axis=0)
    centred = flat - mean
    denom = max(flat.shape[0] - 1, 1)
    tau = symmetrize(centred.T @ centred / denom)
    sigma_c = symmetrize(records[0].sigma_c_path[mask].mean(axis=0))
    sigma = sigma_c + tau

    n_batches = max(1, min(n_batches, n_traj))
    batch_means = np.empty((n_batches, dim))
    batch_sigmas = np.empty((n_batches, dim, dim))
    for b, chunk in enumerate(np.array_split(np.arange(n_traj), n_batches)):
        sub = pool[chunk].reshape(-1, dim)
        bm = sub.mean(axis=0)
        batch_means[b] = bm
        sub_c = sub - bm
        batch_sigmas[b] = sigma_c + sub_c.T @ sub_c / max(sub.shape[0] - 1, 1)
    if n_batches > 1:
        se_mean = batch_means.std(axis=0, ddof=1) / np.sqrt(n_batches)
        se_sigma = batch_sigmas.std(axis=0, ddof=1) / np.sqrt(n_batches)
    else:
        se_mean = np.full(dim, np.nan)
        se_sigma = np.full((dim, dim), np.nan)

    return EnsembleStats(mean, tau, sigma, sigma_c, se_mean, se_sigma, flat.shape[0])
