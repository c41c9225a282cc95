"""Self-convergence of the splitting scheme under (dt/4, dx/2) refinement.

The same realization of the driving noise is used on every level: cell
increments are drawn once on the finest lattice and aggregated by
summation, which reproduces the coarse-cell law exactly (stability under
convolution).  Refinement distances then measure discretization error
with the Monte-Carlo noise common across levels.
"""

import numpy as np
import pytest

from stableheat.coefficients import make_pair
from stableheat.integrator import SolverConfig, point_mass_initial, run
from stableheat.kernel import Grid1D
from stableheat.noise import NoiseModel, replica_rng, sample_stable_cells

L = 10.0
ALPHA = 1.5
BETA = 1.0 / ALPHA
T = 0.2
LEVELS = [
    dict(n_cells=64, dt=1.6e-3),
    dict(n_cells=128, dt=4.0e-4),
    dict(n_cells=256, dt=1.0e-4),
]


def _coarsen_noise(fine: np.ndarray) -> np.ndarray:
    """(4 time, 2 space) block sums: exact coarse-cell increments."""
    n_t, n_x = fine.shape
    return fine.reshape(n_t // 4, 4, n_x // 2, 2).sum(axis=(1, 3))


def _coarsen_field(values: np.ndarray, factor: int) -> np.ndarray:
    return values.reshape(-1, factor).mean(axis=1)


def _run_level(level: dict, slices: np.ndarray, seed: int):
    grid = Grid1D(L, level["n_cells"])
    model = NoiseModel(alpha=ALPHA, dt=level["dt"], dx=grid.dx, L=L, seed=seed)
    cfg = SolverConfig(
        dt=level["dt"], n_steps=slices.shape[0], noise=model,
        coefficients=make_pair("zero", f"power:{BETA}"),
        record_every=slices.shape[0],
    )
    X0 = point_mass_initial(grid, 1.0, 0.0)
    return run(cfg, X0, noise_slices=list(slices)).final().values


def test_refinement_contracts_by_at_least_1_5():
    n_steps_fine = round(T / LEVELS[2]["dt"])
    diffs01, diffs12 = [], []
    for rep in range(30):
        rng = replica_rng(2026, rep)
        model_f = NoiseModel(alpha=ALPHA, dt=LEVELS[2]["dt"], dx=2 * L / 256, L=L, seed=0)
        fine = sample_stable_cells(model_f, n_steps_fine * 256, rng).reshape(n_steps_fine, 256)
        mid = _coarsen_noise(fine)
        coarse = _coarsen_noise(mid)
        x0 = _run_level(LEVELS[0], coarse, rep)
        x1 = _run_level(LEVELS[1], mid, rep)
        x2 = _run_level(LEVELS[2], fine, rep)
        dx0 = 2 * L / 64
        diffs01.append(np.sum(np.abs(x0 - _coarsen_field(x1, 2))) * dx0)
        diffs12.append(np.sum(np.abs(_coarsen_field(x1, 2) - _coarsen_field(x2, 4))) * dx0)
    d01 = float(np.mean(diffs01))
    d12 = float(np.mean(diffs12))
    assert d12 > 0
    assert d01 / d12 >= 1.5, f"refinement ratio {d01 / d12:.2f} below 1.5 (d01={d01:.4g}, d12={d12:.4g})"
