"""Smoothed absolute-value test functions and mollifiers.

For n >= 1 set a_n = exp(-n(n+1)/2), so a_{n+1} = a_n * a_n^(2/n).  The
bump psi_n is supported in (a_n, a_{n-1}), integrates to one and obeys
0 <= psi_n(x) <= 2/(n x).  A plain normalized bump cannot satisfy the cap
(its peak is ~2.6/width while the cap allows ~2/(n a_{n-1}) there), so
psi_n is built as a smooth window times 1/x: in log coordinates
u = ln x the profile is a smoothstep window w(u) of length n with ramps
of length min(1, n/4), and

    psi_n(x) = c_n w(ln x) / x,      c_n = 1 / integral(w) <= 2/n,

which meets the cap with margin for every n >= 1.  From psi_n,

    phi_n(x)  = int_0^|x| dy int_0^y psi_n(z) dz,
    D_n(y, z) = phi_n(y+z) - phi_n(y) - z phi_n'(y),
    H_n(y, z) = phi_n(y+z) - phi_n(y),

with |phi_n'| <= 1, |H_n(y,z)| <= |z|, 0 <= D_n(y,z) <= 2|z| and
sup_x(|x| - phi_n(x)) <= a_{n-1}.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np
from scipy.integrate import cumulative_simpson, quad
from scipy.interpolate import CubicSpline

from .kernel import DomainError, Grid1D

_GRID_POINTS = 32769  # dense log-space nodes; keeps phi/phi' accurate to <1e-10


def a_threshold(n: int) -> float:
    """a_n = exp(-n(n+1)/2); a_0 = 1."""
    if n < 0:
        raise DomainError("threshold index must be >= 0")
    return math.exp(-n * (n + 1) / 2.0)


def _smoothstep(t) -> np.ndarray:
    """C-infinity ramp: 0 for t <= 0, 1 for t >= 1, exp-type in between."""
    t = np.atleast_1d(np.asarray(t, dtype=float))
    lo = t <= 0.0
    hi = t >= 1.0
    mid = ~(lo | hi)
    out = np.zeros_like(t)
    out[hi] = 1.0
    tm = t[mid]
    a = np.exp(-1.0 / tm)
    b = np.exp(-1.0 / (1.0 - tm))
    out[mid] = a / (a + b)
    return out if out.size > 1 else out[0]


@dataclass(frozen=True)
class YWSequence:
    """phi_n and friends for one index n; immutable after construction."""

    n: int
    a_n: float
    a_prev: float
    norm: float                      # c_n
    ramp: float
    _u: np.ndarray
    _psi_u: np.ndarray               # c_n * w(u) = x * psi_n(x) at x = e^u
    _cdf: CubicSpline                # u -> Psi(e^u) = int_0^x psi_n
    _intcdf: CubicSpline             # u -> int_{a_n}^{x} Psi(y) dy
    plateau_gap: float               # |x| - phi_n(x) for |x| >= a_{n-1}

    def psi(self, x) -> np.ndarray:
        """The bump psi_n evaluated pointwise."""
        x = np.asarray(x, dtype=float)
        out = np.zeros_like(x)
        inside = (x > self.a_n) & (x < self.a_prev)
        if np.any(inside):
            u = np.log(x[inside])
            w = _smoothstep((u - math.log(self.a_n)) / self.ramp) * _smoothstep(
                (math.log(self.a_prev) - u) / self.ramp
            )
            out[inside] = self.norm * w / x[inside]
        return out

    def cdf(self, y) -> np.ndarray:
        """Psi_n(y) = int_0^y psi_n(z) dz, clipped to [0, 1]."""
        y = np.asarray(y, dtype=float)
        out = np.zeros_like(y)
        out[y >= self.a_prev] = 1.0
        inside = (y > self.a_n) & (y < self.a_prev)
        if np.any(inside):
            out[inside] = np.clip(self._cdf(np.log(y[inside])), 0.0, 1.0)
        return out

    def phi(self, x) -> np.ndarray:
        """phi_n(x) = int_0^|x| Psi_n(y) dy (even, convex, 0 at 0)."""
        ax = np.abs(np.asarray(x, dtype=float))
        out = np.zeros_like(ax)
        plateau = ax >= self.a_prev
        out[plateau] = ax[plateau] - self.plateau_gap
        inside = (ax > self.a_n) & (ax < self.a_prev)
        if np.any(inside):
            out[inside] = np.maximum(self._intcdf(np.log(ax[inside])), 0.0)
        return out

    def phi_prime(self, x) -> np.ndarray:
        """phi_n'(x) = sgn(x) Psi_n(|x|), bounded by 1 in modulus."""
        x = np.asarray(x, dtype=float)
        return np.sign(x) * self.cdf(np.abs(x))

    def D(self, y, z) -> np.ndarray:
        """D_n(y, z) = phi_n(y+z) - phi_n(y) - z phi_n'(y)."""
        y = np.asarray(y, dtype=float)
        z = np.asarray(z, dtype=float)
        return self.phi(y + z) - self.phi(y) - z * self.phi_prime(y)

    def Hn(self, y, z) -> np.ndarray:
        """H_n(y, z) = phi_n(y+z) - phi_n(y)."""
        y = np.asarray(y, dtype=float)
        z = np.asarray(z, dtype=float)
        return self.phi(y + z) - self.phi(y)


def build_sequence(n: int, grid_points: int = _GRID_POINTS) -> YWSequence:
    """Construct the index-n sequence and assert its invariants.

    Raises DomainError if any claimed property (threshold identity, support,
    unit mass, the 2/(n x) cap, |phi'| <= 1) fails numerically.
    """
    if n < 1:
        raise DomainError("sequence index must be >= 1")
    a_n, a_prev = a_threshold(n), a_threshold(n - 1)
    # identity a_{n+1} = a_n * a_n^(2/n), relative tolerance 1e-12
    ident = a_n * a_n ** (2.0 / n)
    if abs(ident - a_threshold(n + 1)) > 1e-12 * a_threshold(n + 1):
        raise DomainError("threshold identity failed")
    lo, hi = math.log(a_n), math.log(a_prev)
    ramp = min(1.0, n / 4.0)
    window = lambda u: _smoothstep((u - lo) / ramp) * _smoothstep((hi - u) / ramp)
    total, err = quad(window, lo, hi, epsabs=1e-13, epsrel=1e-13, limit=200)
    if err > 1e-10:
        raise DomainError("window quadrature did not converge")
    norm = 1.0 / total
    if norm > 2.0 / n:
        raise DomainError("cap 2/(n x) cannot be met by this window")

    u = np.linspace(lo, hi, grid_points)
    psi_u = norm * window(u)
    cdf_vals = np.concatenate([[0.0], cumulative_simpson(psi_u, x=u)])
    # renormalize so Psi reaches exactly 1 at a_{n-1}
    scale = cdf_vals[-1]
    cdf_vals /= scale
    psi_u /= scale
    norm /= scale
    intcdf_vals = np.concatenate([[0.0], cumulative_simpson(cdf_vals * np.exp(u), x=u)])
    gap = a_prev - float(intcdf_vals[-1])
    seq = YWSequence(
        n=n, a_n=a_n, a_prev=a_prev, norm=norm, ramp=ramp,
        _u=u, _psi_u=psi_u,
        _cdf=CubicSpline(u, cdf_vals),
        _intcdf=CubicSpline(u, intcdf_vals),
        plateau_gap=gap,
    )
    _assert_invariants(seq)
    return seq


def _assert_invariants(seq: YWSequence) -> None:
    x = np.exp(np.linspace(math.log(seq.a_n), math.log(seq.a_prev), 2001))
    p = seq.psi(x)
    if np.any(p < -1e-15):
        raise DomainError("psi_n must be nonnegative")
    if np.any(p > 2.0 / (seq.n * x) * (1.0 + 1e-9)):
        raise DomainError("cap psi_n <= 2/(n x) violated")
    mass, _ = quad(lambda t: float(seq.psi(np.array([t]))[0]), seq.a_n, seq.a_prev,
                   epsabs=1e-12, epsrel=1e-12, limit=300)
    if abs(mass - 1.0) > 1e-8:
        raise DomainError("integral of psi_n deviates from 1 beyond 1e-8")
    if seq.plateau_gap > seq.a_prev + 1e-12 or seq.plateau_gap <= 0:
        raise DomainError("sup(|x| - phi_n) must lie in (0, a_{n-1}]")


@dataclass(frozen=True)
class Mollifier:
    """Scaled smooth bump Phi_x^m(y) = m Phi(m(x - y)), supp Phi = (-1, 1)."""

    m: float

    _NORM = 0.4439938161680794  # int_{-1}^{1} exp(-1/(1-y^2)) dy

    def __post_init__(self):
        if self.m < 1:
            raise DomainError("mollifier scale m must be >= 1")

    @staticmethod
    def profile(y) -> np.ndarray:
        """The unit bump Phi: 0 <= Phi <= 1, supp (-1, 1), integral 1."""
        y = np.asarray(y, dtype=float)
        out = np.zeros_like(y)
        inside = np.abs(y) < 1.0
        out[inside] = np.exp(-1.0 / (1.0 - y[inside] ** 2)) / Mollifier._NORM
        return out

    def kernel(self, x: float, y) -> np.ndarray:
        return self.m * self.profile(self.m * (x - np.asarray(y, dtype=float)))

    def mollify(self, values: np.ndarray, grid: Grid1D, x: float) -> float:
        """Discrete <U, Phi_x^m> with the kernel mass renormalized on the grid.

        When 1/m falls below dx the kernel can fall between nodes; the
        weights are normalized by their own discrete mass, degrading
        gracefully to the nearest-cell value.
        """
        c = grid.centers
        w = self.kernel(x, c)
        W = float(np.sum(w) * grid.dx)
        if W <= 0.0:
            return float(values[grid.cell_of(x)])
        return float(np.sum(values * w) * grid.dx / W)


def min_abs_offset(values: np.ndarray, grid: Grid1D, x: float, m: float, n_offsets: int = 201) -> float:
    """Offset y* in [-1, 1] minimizing |V(x - y/m)| on the grid.

    Ties break to the smallest offset index (np.argmin convention).
    """
    ys = np.linspace(-1.0, 1.0, n_offsets)
    vals = np.abs(values[grid.cell_of(x - ys / m)])
    return float(ys[int(np.argmin(vals))])


def localized_functional(
    U: np.ndarray,
    grid: Grid1D,
    Psi: Callable[[np.ndarray], np.ndarray],
    seq: YWSequence,
    moll: Mollifier,
    probe_xs: Sequence[float],
) -> float:
    """<phi_n(<U, Phi_.^m>), Psi> by quadrature over the probe set."""
    xs = np.asarray(probe_xs, dtype=float)
    if np.any(np.abs(xs) > grid.L):
        raise DomainError("probe points must lie inside the grid")
    smoothed = np.array([moll.mollify(U, grid, float(x)) for x in xs])
    vals = seq.phi(smoothed) * np.asarray(Psi(xs), dtype=float)
    return float(np.trapezoid(vals, xs))
