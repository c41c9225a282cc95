"""Splitting scheme for the stable-noise heat equation on the periodic grid.

One step of size dt, in order:

  diffuse   X <- P_dt X            (exact periodic heat semigroup)
  react     X <- X + dt G(X)
  jump      X(x_j) <- X(x_j) + H(X(x_j)) dL_j / dx
  clamp     negatives set to zero, clamped mass logged as a scheme error

H is evaluated on the pre-jump field (one snapshot for every cell),
matching the predictable integrand H(X_{s-}).  The diffusion is exact in
the semigroup sense, the reaction is explicit Euler, and the jump stage
applies the per-cell noise increments of the configured representation.
Point-mass initial data are spread over one cell (value = mass / dx).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .coefficients import CoefficientPair
from .kernel import DomainError, Grid1D, semigroup_apply
from .noise import (
    NoiseModel,
    raw_noise_increments,
    rng_for,
    thinned_field_increment,
    _DOMAIN_TRAJ,
)


class IntegrationError(RuntimeError):
    """Raised when a step produces non-finite values (jump overflow)."""


@dataclass(frozen=True)
class FieldState:
    """Nonnegative solution values on the grid at one time slice."""

    values: np.ndarray
    t: float
    grid: Grid1D

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.shape != (self.grid.n_cells,):
            raise DomainError("field shape must match the grid")
        if not np.all(np.isfinite(v)):
            raise DomainError("field values must be finite")
        if np.any(v < 0):
            raise DomainError("field values must be nonnegative")
        object.__setattr__(self, "values", v)

    def mass(self) -> float:
        return float(np.sum(self.values) * self.grid.dx)

    def pair(self, f_values: np.ndarray) -> float:
        """<X, f> for f given by its grid samples."""
        return float(np.sum(self.values * f_values) * self.grid.dx)


def point_mass_initial(grid: Grid1D, mass: float = 1.0, x0: float = 0.0) -> FieldState:
    """Dirac initial measure spread over the cell containing x0."""
    v = np.zeros(grid.n_cells)
    v[int(grid.cell_of(x0))] = mass / grid.dx
    return FieldState(v, 0.0, grid)


@dataclass(frozen=True)
class SolverConfig:
    dt: float
    n_steps: int
    noise: NoiseModel
    coefficients: CoefficientPair
    clamp_policy: str = "clamp_to_zero"
    record_every: int = 1
    q: Optional[float] = None  # integrability monitor exponent, if set

    def __post_init__(self):
        if self.dt <= 0:
            raise DomainError("dt must be positive")
        if self.n_steps < 0:
            raise DomainError("n_steps must be >= 0")
        if self.record_every < 1:
            raise DomainError("record_every must be >= 1")
        if self.clamp_policy != "clamp_to_zero":
            raise DomainError("unknown clamp policy")
        if abs(self.dt - self.noise.dt) > 1e-12 * self.dt:
            raise DomainError("solver dt must match the noise model's time cell")

    def check_grid(self, grid: Grid1D) -> None:
        if abs(grid.dx - self.noise.dx) > 1e-12 * grid.dx or abs(grid.L - self.noise.L) > 1e-12 * grid.L:
            raise DomainError("grid cells must match the noise model's space cell")


@dataclass
class Trajectory:
    """Recorded snapshots plus per-snapshot scalar diagnostics."""

    snapshots: list[FieldState]
    times: np.ndarray
    mass: np.ndarray
    sup: np.ndarray
    clamped_mass: np.ndarray          # cumulative, in mass units
    weak_residual: np.ndarray         # |R(f)| for the configured test function
    assumption_integral: Optional[np.ndarray]  # int_0^t ds sum X^q dx, if q set

    def final(self) -> FieldState:
        return self.snapshots[-1]


@dataclass
class _StageBreakdown:
    after_diffuse: np.ndarray
    after_react: np.ndarray
    after_jump: np.ndarray
    clamped: float


def _advance(values: np.ndarray, cfg: SolverConfig, grid: Grid1D, noise_slice: np.ndarray) -> _StageBreakdown:
    dt = cfg.dt
    if not np.all(np.isfinite(noise_slice)):
        raise IntegrationError("jump overflow: non-finite noise increments")
    diffused = semigroup_apply(values, dt, grid)
    reacted = diffused + dt * np.asarray(cfg.coefficients.G(diffused), dtype=float)
    h = np.asarray(cfg.coefficients.H(np.maximum(reacted, 0.0)), dtype=float)
    jumped = reacted + h * noise_slice / grid.dx
    if not np.all(np.isfinite(jumped)):
        bad = int(np.sum(~np.isfinite(jumped)))
        raise IntegrationError(
            f"jump overflow: {bad} non-finite cells (max |noise| = {np.max(np.abs(noise_slice)):.3e})"
        )
    clamped = -float(np.sum(np.minimum(jumped, 0.0)) * grid.dx)
    return _StageBreakdown(diffused, reacted, jumped, clamped)


def step(state: FieldState, cfg: SolverConfig, noise_slice: np.ndarray) -> FieldState:
    """Advance one step against externally supplied per-cell noise increments."""
    cfg.check_grid(state.grid)
    noise_slice = np.asarray(noise_slice, dtype=float)
    if noise_slice.shape != (state.grid.n_cells,):
        raise DomainError("noise slice shape must match the grid")
    stages = _advance(state.values, cfg, state.grid, noise_slice)
    return FieldState(np.maximum(stages.after_jump, 0.0), state.t + cfg.dt, state.grid)


def default_weak_test_function(grid: Grid1D) -> tuple[np.ndarray, np.ndarray, float]:
    """Gaussian test function: samples, discrete Laplacian, and ||f''||.

    The residual bookkeeping pairs the path with the discrete Laplacian of
    f (the generator actually driving the diffusion stage); the analytic
    ||f''|| is returned for tolerance scaling.
    """
    from .kernel import discrete_laplacian

    x = grid.centers
    f = np.exp(-x * x / 2.0)
    fpp_analytic = (x * x - 1.0) * f
    return f, discrete_laplacian(f, grid), float(np.max(np.abs(fpp_analytic)))


def _make_slice_source(cfg: SolverConfig, grid: Grid1D, rng: np.random.Generator):
    """Per-step noise for the state-independent representations."""
    def source(step_index: int, _values: np.ndarray) -> np.ndarray:
        t0 = step_index * cfg.dt
        return raw_noise_increments(cfg.noise, grid, (t0, t0 + cfg.dt), rng)
    return source


def run(
    cfg: SolverConfig,
    X0: FieldState,
    rng: Optional[np.random.Generator] = None,
    noise_slices: Optional[Sequence[np.ndarray]] = None,
    weak_test: Optional[tuple[np.ndarray, np.ndarray]] = None,
) -> Trajectory:
    """Integrate forward, recording snapshots and consistency diagnostics.

    The weak-form residual R(f) = <X_t,f> - <X_0,f> - (1/2) int <X_s,f''> ds
    - int <G(X_s),f> ds - (jump stage contributions) is evaluated at every
    recorded snapshot; clamping is deliberately left out of R so the
    residual exposes both time-quadrature error and clamp leakage.
    """
    grid = X0.grid
    cfg.check_grid(grid)
    if rng is None:
        rng = rng_for(cfg.noise.seed, _DOMAIN_TRAJ)
    if weak_test is None:
        f, fpp, _ = default_weak_test_function(grid)
    else:
        f, fpp = weak_test
    thinned = cfg.noise.mode == "thinned"
    source = None if (noise_slices is not None or thinned) else _make_slice_source(cfg, grid, rng)

    values = X0.values.copy()
    t = X0.t
    dx = grid.dx

    snapshots = [FieldState(values.copy(), t, grid)]
    times, mass, sup = [t], [float(values.sum() * dx)], [float(values.max())]
    clamped_cum = 0.0
    clamped = [0.0]
    f0 = float(np.sum(values * f) * dx)
    diff_term = drift_term = jump_term = 0.0
    residuals = [0.0]
    acc = 0.0
    acc_trace = [0.0] if cfg.q is not None else None

    for k in range(cfg.n_steps):
        if thinned:
            pre = semigroup_apply(values, cfg.dt, grid)
            reacted = pre + cfg.dt * np.asarray(cfg.coefficients.G(pre), dtype=float)
            h = np.asarray(cfg.coefficients.H(np.maximum(reacted, 0.0)), dtype=float)
            g = thinned_field_increment(cfg.noise, grid, (t, t + cfg.dt), h, rng)
            jumped = reacted + g / dx
            if not np.all(np.isfinite(jumped)):
                raise IntegrationError("jump overflow in thinned mode")
            stages = _StageBreakdown(pre, reacted, jumped,
                                     -float(np.sum(np.minimum(jumped, 0.0)) * dx))
        else:
            sl = noise_slices[k] if noise_slices is not None else source(k, values)
            stages = _advance(values, cfg, grid, np.asarray(sl, dtype=float))

        diff_term += 0.25 * cfg.dt * float(np.sum((values + stages.after_diffuse) * fpp) * dx)
        drift_term += float(np.sum((stages.after_react - stages.after_diffuse) * f) * dx)
        jump_term += float(np.sum((stages.after_jump - stages.after_react) * f) * dx)
        clamped_cum += stages.clamped
        values = np.maximum(stages.after_jump, 0.0)
        t = X0.t + (k + 1) * cfg.dt
        if cfg.q is not None:
            acc += cfg.dt * float(np.sum(values**cfg.q) * dx)

        if (k + 1) % cfg.record_every == 0 or k + 1 == cfg.n_steps:
            snapshots.append(FieldState(values.copy(), t, grid))
            times.append(t)
            mass.append(float(values.sum() * dx))
            sup.append(float(values.max()))
            clamped.append(clamped_cum)
            ft = float(np.sum(values * f) * dx)
            residuals.append(abs(ft - f0 - diff_term - drift_term - jump_term - clamped_cum))
            if acc_trace is not None:
                acc_trace.append(acc)

    return Trajectory(
        snapshots=snapshots,
        times=np.asarray(times),
        mass=np.asarray(mass),
        sup=np.asarray(sup),
        clamped_mass=np.asarray(clamped),
        weak_residual=np.asarray(residuals),
        assumption_integral=None if acc_trace is None else np.asarray(acc_trace),
    )


def coupled_run(
    cfg: SolverConfig,
    X0: FieldState,
    Y0: FieldState,
    rng: Optional[np.random.Generator] = None,
) -> tuple[Trajectory, Trajectory, np.ndarray]:
    """Advance two solutions against the identical noise-increment sequence.

    Only the state-independent representations (exact_stable,
    jump_decomposition) can drive two solutions with literally the same
    noise field, which is the same-noise coupling of the uniqueness
    statement; thinned mode is rejected.  Returns both trajectories and
    the L1 distance trace <|X_t - Y_t|, 1> at the recorded times.
    """
    if cfg.noise.mode == "thinned":
        raise DomainError("coupled runs require a state-independent noise mode")
    grid = X0.grid
    if Y0.grid != grid:
        raise DomainError("both solutions must share one grid")
    cfg.check_grid(grid)
    if rng is None:
        rng = rng_for(cfg.noise.seed, _DOMAIN_TRAJ, 1)
    source = _make_slice_source(cfg, grid, rng)
    slices = [source(k, None) for k in range(cfg.n_steps)]
    tx = run(cfg, X0, noise_slices=slices)
    ty = run(cfg, Y0, noise_slices=slices)
    dist = np.array(
        [np.sum(np.abs(a.values - b.values)) * grid.dx for a, b in zip(tx.snapshots, ty.snapshots)]
    )
    return tx, ty, dist
