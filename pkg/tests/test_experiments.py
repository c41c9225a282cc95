import math

import numpy as np
import pytest

from stableheat.coefficients import ParameterSet, make_pair
from stableheat.experiments import (
    EnsembleSpec,
    bar_integral_trace,
    default_scales,
    estimate_holder,
    holder_quotient,
    increment_moment_check,
    mass_bound_check,
    moment_decay_check,
    stopping_monitors,
    time_continuity_diagnostic,
    uniqueness_experiment,
)
from stableheat.integrator import FieldState, SolverConfig, coupled_run, point_mass_initial, run
from stableheat.kernel import DomainError, Grid1D, semigroup_apply
from stableheat.noise import NoiseModel, rng_for

GRID = Grid1D(10.0, 512)


def _cfg(alpha=1.5, dt=1e-3, n_steps=128, record_every=16, drift="zero",
         noise_coeff="power:0.6666666666666666", seed=5, grid=GRID):
    model = NoiseModel(alpha=alpha, dt=dt, dx=grid.dx, L=grid.L, seed=seed)
    return SolverConfig(dt=dt, n_steps=n_steps, noise=model,
                        coefficients=make_pair(drift, noise_coeff, beta=0.5),
                        record_every=record_every)


def _spec(n=8, seed=123, **kw):
    cfg = _cfg(**kw)
    return EnsembleSpec(n, seed, cfg, point_mass_initial(GRID, 1.0, 0.0))


# ---------------------------------------------------------------------------
# Hoelder estimator oracles
# ---------------------------------------------------------------------------

def test_estimator_exact_on_half_power_cusp():
    # cusp placed on a grid center: sup increments are exactly h^(1/2)
    xc = GRID.centers[GRID.n_cells // 2]
    field = FieldState(np.sqrt(np.abs(GRID.centers - xc)), 0.0, GRID)
    est = estimate_holder(field, window=(-3.0, 3.0))
    assert est.eta_hat == pytest.approx(0.5, abs=0.02)


def test_estimator_exact_on_affine_field():
    field = FieldState(1.0 + 0.3 * (GRID.centers + GRID.L), 0.0, GRID)
    est = estimate_holder(field, window=(-3.0, 3.0))
    assert est.eta_hat == pytest.approx(1.0, abs=1e-9)


def test_estimator_smooth_bump_reads_high():
    field = FieldState(np.exp(-GRID.centers**2 / 8.0), 0.0, GRID)
    est = estimate_holder(field, window=(-3.0, 3.0), scales=default_scales(GRID, 4))
    assert est.eta_hat >= 0.95


def test_estimator_degenerate_field_flagged():
    field = FieldState(np.ones(GRID.n_cells), 0.0, GRID)
    est = estimate_holder(field, window=(-3.0, 3.0))
    assert est.degenerate and math.isnan(est.eta_hat)


def test_estimator_scale_validation():
    field = FieldState(np.abs(GRID.centers), 0.0, GRID)
    with pytest.raises(DomainError):
        estimate_holder(field, scales=np.array([0.2, 0.4, 0.8]))  # too few
    with pytest.raises(DomainError):
        estimate_holder(field, scales=np.array([0.2, 0.3, 0.4, 0.5]))  # span < 8
    with pytest.raises(DomainError):
        estimate_holder(field, scales=GRID.dx * np.array([1.0, 2.0, 4.0, 8.0]))  # < 2 dx
    assert default_scales(GRID).size == 5


# ---------------------------------------------------------------------------
# Moment decay / mass bound
# ---------------------------------------------------------------------------

def test_moment_decay_rejects_pbar_at_alpha():
    spec = _spec()
    with pytest.raises(DomainError):
        moment_decay_check(spec, p_bar=1.6, times=(0.032, 0.064, 0.128))
    with pytest.raises(DomainError):
        moment_decay_check(EnsembleSpec(1, 0, spec.cfg, spec.initial), 1.0,
                           times=(0.032, 0.064, 0.128))


def test_moment_decay_zero_noise_exact_slope():
    # deterministic heat flow: slope of log E[X_t(x0)] vs log t within discretization bias
    spec = _spec(n=2, noise_coeff="zero", n_steps=256, record_every=16)
    res = moment_decay_check(spec, 1.0, times=(0.032, 0.064, 0.128, 0.256), x0=0.0)
    assert res.slope == pytest.approx(-0.5, abs=0.02)
    assert res.passed


def test_moment_decay_small_pbar_flattens():
    spec = _spec(n=2, noise_coeff="zero", n_steps=256, record_every=16)
    res = moment_decay_check(spec, 0.05, times=(0.032, 0.064, 0.128, 0.256), x0=0.0)
    assert abs(res.slope) < 0.05  # slope -> 0 as p_bar -> 0
    assert res.passed


def test_mass_bound_zero_function():
    spec = _spec(n=3, n_steps=64)
    res = mass_bound_check(spec, np.zeros(GRID.n_cells), 0.064)
    assert res.mean == 0.0 and res.bound == 0.0 and res.passed


def test_mass_bound_martingale_two_sided():
    spec = _spec(n=40, n_steps=64, seed=31)
    res = mass_bound_check(spec, np.ones(GRID.n_cells), 0.064)
    assert res.two_sided and res.two_sided_passed and res.passed


def test_mass_bound_with_decay_drift():
    spec = _spec(n=20, n_steps=64, drift="linear:-1", seed=32)
    res = mass_bound_check(spec, np.ones(GRID.n_cells), 0.064)
    # E<X_t,1> ~ exp(-t) X_0(1) <= X_0(1)
    assert res.passed
    assert res.mean < res.bound + 3 * res.stderr + res.clamp_bias


# ---------------------------------------------------------------------------
# Increment moments
# ---------------------------------------------------------------------------

def test_increment_moment_admissibility():
    spec = _spec(n=4, n_steps=64)
    with pytest.raises(DomainError):
        increment_moment_check(spec, delta=0.9, r=0.3, pairs=[(0.0, 0.5)], t=0.064)
    with pytest.raises(DomainError):
        increment_moment_check(spec, delta=1.2, r=0.99, pairs=[(0.0, 0.5)], t=0.064)


def test_increment_moment_zero_separation_is_zero():
    spec = _spec(n=3, n_steps=64, noise_coeff="zero")
    res = increment_moment_check(
        spec, delta=1.2, r=0.4, pairs=[(0.3, 0.3), (0.0, 0.5), (0.0, 1.0), (0.0, 2.0)], t=0.064
    )
    assert res.moments[0] == 0.0


def test_increment_moment_deterministic_kernel_oracle():
    # zero noise: moments equal the deterministic kernel differences exactly
    spec = _spec(n=2, n_steps=64, noise_coeff="zero")
    delta = 1.2
    pairs = [(0.0, 0.5), (0.0, 1.0), (0.0, 2.0)]
    res = increment_moment_check(spec, delta=delta, r=0.4, pairs=pairs, t=0.064)
    flow = semigroup_apply(spec.initial.values, 0.064, GRID)
    for (a, b), mom in zip(pairs, res.moments):
        oracle = abs(flow[GRID.cell_of(a)] - flow[GRID.cell_of(b)]) ** delta
        assert mom == pytest.approx(oracle, rel=1e-12)


def test_increment_moment_monotone_in_lag_superbm():
    spec = _spec(n=30, n_steps=64, seed=77)
    res = increment_moment_check(
        spec, delta=1.2, r=0.4, pairs=[(0.0, 0.25), (0.0, 1.0), (0.0, 4.0)], t=0.064
    )
    assert np.all(np.diff(res.moments) > 0)


# ---------------------------------------------------------------------------
# Stopping monitors and the bar-integral
# ---------------------------------------------------------------------------

def test_bar_integral_constant_oracle():
    depth = 4
    f = np.full(2**depth + 1, 3.0)
    trace = bar_integral_trace(f, T=2.0, depth=depth)
    ts = np.linspace(0, 2.0, 2**depth + 1)
    assert np.allclose(trace, 3.0 * ts, atol=1e-12)


def test_bar_integral_rejects_bad_shape():
    with pytest.raises(DomainError):
        bar_integral_trace(np.zeros(10), 1.0, 4)


def test_holder_quotient_on_cusp():
    xc = GRID.centers[GRID.n_cells // 2]
    vals = np.sqrt(np.abs(GRID.centers - xc))
    q = holder_quotient(vals, GRID, eta=0.5, half_width=3.0)
    assert q == pytest.approx(1.0, rel=0.05)


def test_stopping_monitors_zero_fields_never_fire():
    cfg = _cfg(n_steps=64, record_every=1, noise_coeff="zero")
    zero = FieldState(np.zeros(GRID.n_cells), 0.0, GRID)
    traj = run(cfg, zero, noise_slices=[np.zeros(GRID.n_cells)] * 64)
    mon = stopping_monitors(traj, traj, (0.5, 1.0, 2.0), eta=0.25, K=2.0, depth=5, alpha=1.5)
    assert np.all(np.isinf(mon.gamma)) and np.all(np.isinf(mon.sigma))


def test_stopping_monitors_gamma_low_threshold_first_time():
    cfg = _cfg(n_steps=64, record_every=1)
    X0 = point_mass_initial(GRID, 1.0, 0.0)
    tx, ty, _ = coupled_run(cfg, X0, X0, rng=rng_for(41, 0))
    mon = stopping_monitors(tx, ty, (0.5,), eta=0.25, K=2.0, depth=5, alpha=1.5)
    # combined mass ~2 > 0.5 already at the first recorded positive time
    assert mon.gamma[0] == pytest.approx(tx.times[1])


def test_stopping_monitors_monotone_and_validation():
    cfg = _cfg(n_steps=64, record_every=2)
    X0 = point_mass_initial(GRID, 1.0, 0.0)
    bump = np.exp(-GRID.centers**2)
    Y0 = FieldState(X0.values + 0.1 * bump, 0.0, GRID)
    tx, ty, _ = coupled_run(cfg, X0, Y0, rng=rng_for(42, 0))
    mon = stopping_monitors(tx, ty, (1.0, 2.0, 3.0, 8.0), eta=0.25, K=2.0, depth=5, alpha=1.5)
    monotone = lambda arr: bool(np.all(arr[1:] >= arr[:-1]))  # inf >= inf holds
    assert monotone(mon.gamma) and monotone(mon.sigma)
    with pytest.raises(DomainError):
        stopping_monitors(tx, ty, (1.0,), eta=0.5, K=2.0, depth=5, alpha=1.5)  # eta >= eta_c
    with pytest.raises(DomainError):
        stopping_monitors(tx, ty, (1.0,), eta=0.25, K=2.0, depth=7, alpha=1.5)  # too deep
    with pytest.raises(DomainError):
        stopping_monitors(tx, ty, (1.0,), eta=0.25, K=GRID.L, depth=5, alpha=1.5)


# ---------------------------------------------------------------------------
# Uniqueness experiment
# ---------------------------------------------------------------------------

def test_uniqueness_gate_enforcement_and_watermark():
    cfg = _cfg(alpha=1.5, n_steps=32, record_every=8)
    X0 = point_mass_initial(GRID, 1.0, 0.0)
    params = ParameterSet(alpha=1.5, beta=1.0 / 1.5)  # p = 1 but alpha > 4 - 2 sqrt 2
    with pytest.raises(DomainError):
        uniqueness_experiment(cfg, X0, (0.1,), params, n_replicas=2, master_seed=3)
    rep = uniqueness_experiment(cfg, X0, (0.1, 0.05), params, n_replicas=2, master_seed=3,
                                allow_inadmissible=True)
    assert rep.watermark == "outside the admissible uniqueness regime"
    assert rep.identical_bit_equal


def test_uniqueness_zero_perturbation_zero_distance():
    cfg = _cfg(alpha=1.1, noise_coeff="power:0.9090909090909091", n_steps=32, record_every=8)
    X0 = point_mass_initial(GRID, 1.0, 0.0)
    params = ParameterSet(alpha=1.1, beta=1.0 / 1.1)
    rep = uniqueness_experiment(cfg, X0, (0.0,), params, n_replicas=2, master_seed=4)
    assert rep.distances[0] == 0.0
    assert rep.watermark is None


# ---------------------------------------------------------------------------
# Time continuity diagnostic
# ---------------------------------------------------------------------------

def test_time_continuity_monitor_decreasing():
    spec = _spec(n=30, n_steps=128, record_every=8, seed=91)
    means = time_continuity_diagnostic(spec, t=0.064, offsets=(0.032, 0.016, 0.008), x_probe=0.0)
    assert means.size == 3
    assert means[-1] <= means[-2] <= means[-3]
