"""One-sided alpha-stable space-time white noise.

The jump intensity is the Levy measure m(dz) = c0 z^(-1-alpha) dz on z > 0
with c0 = alpha(alpha-1)/Gamma(2-alpha).  This normalization makes the
compensated cumulant of the noise over a space-time cell of volume V
exactly V (-iu)^alpha, so the cell increment is a strictly alpha-stable,
totally positively skewed, mean-zero variable with scale

    sigma = (V |cos(pi alpha / 2)|)^(1/alpha).

Three interchangeable representations are provided:

``exact_stable``
    one exact stable draw per cell (Chambers-Mallows-Stuck sampler);
``jump_decomposition``
    explicit Poisson atoms with size z > epsilon, recentred by the
    compensator drift, plus (by default) a Gaussian completion for the
    compensated small jumps z <= epsilon;
``thinned``
    atoms carry an extra uniform mark v and are accepted against a
    state-dependent level |H(X)|^alpha; produced from a plain stream by
    :func:`thinning_transform` and mapped back by :func:`project_thinned`.

Randomness policy: every sampler takes a ``numpy.random.Generator``; when
omitted, one is derived deterministically from the model seed and the
sampling window, so equal seeds give byte-identical streams and replicas
are order-independent.
"""

from __future__ import annotations

import math
import struct
from dataclasses import dataclass, replace
from typing import Iterator, Optional

import numpy as np
from scipy.special import gamma as _gamma

from .kernel import DomainError, Grid1D

MODES = ("exact_stable", "jump_decomposition", "thinned")

_MAGIC = b"SPDEJMP1"

# domain tags keep derived RNG streams from colliding
_DOMAIN_WINDOW = 0x57494E44
_DOMAIN_REPLICA = 0x5245504C
_DOMAIN_TRAJ = 0x54524A31


def _float_bits(x: float) -> int:
    return struct.unpack("<Q", struct.pack("<d", float(x)))[0]


def rng_for(seed: int, *ids: int) -> np.random.Generator:
    """Deterministic generator derived from (seed, stream identifiers)."""
    return np.random.default_rng(np.random.SeedSequence([int(seed) & (2**64 - 1), *map(int, ids)]))


def replica_rng(seed: int, replica: int) -> np.random.Generator:
    """Per-replica stream; independent of the order replicas are run in."""
    return rng_for(seed, _DOMAIN_REPLICA, replica)


def levy_constant(alpha: float) -> float:
    """c0 = alpha (alpha - 1) / Gamma(2 - alpha) for alpha in (1, 2)."""
    if not 1.0 < alpha < 2.0:
        raise DomainError("alpha must lie in (1, 2)")
    return alpha * (alpha - 1.0) / float(_gamma(2.0 - alpha))


@dataclass(frozen=True)
class NoiseModel:
    """Parameters and sampling state for the one-sided stable noise."""

    alpha: float
    epsilon: float = 1e-3
    dt: float = 2.5e-4
    dx: float = 2.0 * 10.0 / 512
    L: float = 10.0
    seed: int = 0
    mode: str = "exact_stable"
    small_jump_completion: bool = True

    def __post_init__(self):
        if not 1.0 < self.alpha < 2.0:
            raise DomainError("alpha must lie in (1, 2)")
        if self.epsilon <= 0:
            raise DomainError("epsilon must be positive")
        if self.dt <= 0 or self.dx <= 0 or self.L <= 0:
            raise DomainError("dt, dx and L must be positive")
        if self.mode not in MODES:
            raise DomainError(f"mode must be one of {MODES}")

    @property
    def c0(self) -> float:
        return levy_constant(self.alpha)

    @property
    def cell_volume(self) -> float:
        return self.dt * self.dx

    def cell_scale(self) -> float:
        """Stable scale of one compensated dt*dx cell increment."""
        return (self.cell_volume * abs(math.cos(math.pi * self.alpha / 2.0))) ** (1.0 / self.alpha)

    def with_mode(self, mode: str) -> "NoiseModel":
        return replace(self, mode=mode)


@dataclass(frozen=True)
class JumpEvent:
    """One atom (s, z, u[, v]) of the Poisson random measure."""

    s: float
    z: float
    u: float
    v: Optional[float] = None

    def __post_init__(self):
        vals = [self.s, self.z, self.u] + ([] if self.v is None else [self.v])
        if not all(math.isfinite(x) for x in vals):
            raise DomainError("jump event fields must be finite")
        if self.z <= 0:
            raise DomainError("jump sizes are strictly positive (no negative jumps)")


def _lexsort_events(s, z, u, v=None):
    order = np.lexsort((z, u, s))  # primary s, then u, then z
    if v is None:
        return s[order], z[order], u[order], None
    return s[order], z[order], u[order], v[order]


@dataclass(frozen=True)
class JumpStream:
    """Time-ordered atoms over a window, with deterministic tie-breaks."""

    s: np.ndarray
    z: np.ndarray
    u: np.ndarray
    v: Optional[np.ndarray]
    window: tuple[float, float]
    truncation: float
    domain_half_width: float
    mode: str = "jump_decomposition"

    def __post_init__(self):
        t0, t1 = self.window
        if t1 <= t0:
            raise DomainError("window must satisfy t1 > t0")
        if self.s.size:
            if np.any(self.z <= 0):
                raise DomainError("all jump sizes must be positive")
            if np.any((self.s < t0) | (self.s > t1)):
                raise DomainError("event times must lie in the window")
            if np.any(np.abs(self.u) > self.domain_half_width):
                raise DomainError("event locations must lie in [-L, L]")
            key = np.lexsort((self.z, self.u, self.s))
            if not np.array_equal(key, np.arange(self.s.size)):
                raise DomainError("events must be sorted by (s, u, z)")

    def __len__(self) -> int:
        return int(self.s.size)

    @property
    def events(self) -> Iterator[JumpEvent]:
        for i in range(len(self)):
            yield JumpEvent(
                float(self.s[i]),
                float(self.z[i]),
                float(self.u[i]),
                None if self.v is None else float(self.v[i]),
            )

    def to_bytes(self) -> bytes:
        """Little-endian dump: 16-byte header, then (s, z, u, v|NaN) f64 records."""
        n = len(self)
        head = _MAGIC + struct.pack("<II", n, 0)
        v = np.full(n, np.nan) if self.v is None else self.v
        rec = np.empty((n, 4), dtype="<f8")
        rec[:, 0], rec[:, 1], rec[:, 2], rec[:, 3] = self.s, self.z, self.u, v
        return head + rec.tobytes()

    @staticmethod
    def from_bytes(
        raw: bytes, window: tuple[float, float], truncation: float, L: float, mode: str = "jump_decomposition"
    ) -> "JumpStream":
        if raw[:8] != _MAGIC:
            raise DomainError("bad jump-stream magic")
        (n, _reserved) = struct.unpack("<II", raw[8:16])
        rec = np.frombuffer(raw[16:], dtype="<f8").reshape(n, 4)
        v = rec[:, 3].copy()
        has_v = not np.all(np.isnan(v))
        return JumpStream(
            rec[:, 0].copy(), rec[:, 1].copy(), rec[:, 2].copy(),
            v if has_v else None, window, truncation, L, mode,
        )


def large_jump_rate(model: NoiseModel, window_length: float, region_length: float) -> float:
    """Mean number of atoms with z > epsilon in a window x region box."""
    if window_length <= 0 or region_length <= 0:
        raise DomainError("window_length and region_length must be positive")
    return window_length * region_length * model.c0 * model.epsilon ** (-model.alpha) / model.alpha


def small_jump_compensation(model: NoiseModel) -> float:
    """Drift -int_eps^inf z m(dz) per unit (time x space), always negative."""
    return -model.c0 * model.epsilon ** (1.0 - model.alpha) / (model.alpha - 1.0)


def small_jump_variance(model: NoiseModel) -> float:
    """Variance int_0^eps z^2 m(dz) of the compensated small jumps per unit volume."""
    return model.c0 * model.epsilon ** (2.0 - model.alpha) / (2.0 - model.alpha)


def sample_jump_sizes(model: NoiseModel, n: int, rng: np.random.Generator) -> np.ndarray:
    """Inverse-CDF sizes z = eps * U^(-1/alpha) from m restricted to (eps, inf)."""
    return model.epsilon * rng.uniform(size=n) ** (-1.0 / model.alpha)


def sample_large_jumps(
    model: NoiseModel, window: tuple[float, float], rng: Optional[np.random.Generator] = None
) -> JumpStream:
    """Poisson atoms of the noise with z > epsilon over window x [-L, L]."""
    t0, t1 = window
    if t1 <= t0:
        raise DomainError("window must satisfy t1 > t0")
    if rng is None:
        rng = rng_for(model.seed, _DOMAIN_WINDOW, _float_bits(t0), _float_bits(t1))
    lam = large_jump_rate(model, t1 - t0, 2.0 * model.L)
    n = int(rng.poisson(lam))
    s = rng.uniform(t0, t1, n)
    u = rng.uniform(-model.L, model.L, n)
    z = sample_jump_sizes(model, n, rng)
    s, z, u, _ = _lexsort_events(s, z, u)
    return JumpStream(s, z, u, None, window, model.epsilon, model.L, "jump_decomposition")


def _skewed_stable_standard(alpha: float, size, rng: np.random.Generator) -> np.ndarray:
    """Totally skewed (beta=1) strictly stable draws, unit scale, zero mean.

    Chambers-Mallows-Stuck with Weron's parametrization: the output has
    characteristic function exp{-|u|^alpha (1 - i sgn(u) tan(pi alpha/2))}.
    """
    U = rng.uniform(-math.pi / 2.0, math.pi / 2.0, size)
    W = rng.exponential(1.0, size)
    ta = math.tan(math.pi * alpha / 2.0)
    B = math.atan(ta) / alpha
    S = (1.0 + ta * ta) ** (1.0 / (2.0 * alpha))
    return (
        S
        * np.sin(alpha * (U + B))
        / np.cos(U) ** (1.0 / alpha)
        * (np.cos(U - alpha * (U + B)) / W) ** ((1.0 - alpha) / alpha)
    )


def sample_stable_cells(model: NoiseModel, n: int, rng: Optional[np.random.Generator] = None) -> np.ndarray:
    """n independent exact cell increments of the noise (mode exact_stable)."""
    if rng is None:
        rng = rng_for(model.seed, _DOMAIN_WINDOW, 0, 0)
    return model.cell_scale() * _skewed_stable_standard(model.alpha, n, rng)


def sample_stable_cell(model: NoiseModel, rng: Optional[np.random.Generator] = None) -> float:
    """One increment of the noise over a dt x dx cell."""
    return float(sample_stable_cells(model, 1, rng)[0])


def raw_noise_increments(model: NoiseModel, grid: Grid1D, window: tuple[float, float], rng: np.random.Generator) -> np.ndarray:
    """Per-cell increments of L over one time slice, per the model's mode.

    State-independent (N-picture) representations only; the thinned mode
    is state-dependent and handled by :func:`thinned_field_increment`.
    """
    n = grid.n_cells
    if model.mode == "exact_stable":
        return sample_stable_cells(model, n, rng)
    if model.mode == "jump_decomposition":
        stream = sample_large_jumps(model, window, rng)
        dL = np.zeros(n)
        if len(stream):
            np.add.at(dL, grid.cell_of(stream.u), stream.z)
        dL += model.cell_volume * small_jump_compensation(model)
        if model.small_jump_completion:
            dL += rng.normal(0.0, math.sqrt(model.cell_volume * small_jump_variance(model)), n)
        return dL
    raise DomainError("raw_noise_increments: thinned mode is state-dependent")


def thinned_field_increment(
    model: NoiseModel, grid: Grid1D, window: tuple[float, float], hvals: np.ndarray, rng: np.random.Generator
) -> np.ndarray:
    """Jump-stage field increment (times dx) in the thinned representation.

    Atoms (s, z, u, v) with intensity ds m(dz) du dv are accepted when
    v <= |H(X(u))|^alpha; each accepted atom adds z sgn(H) to the cell
    integral, and the compensator removes the matching mean.
    """
    h = np.asarray(hvals, dtype=float)
    habs = np.abs(h) ** model.alpha
    vmax = float(np.max(habs)) if habs.size else 0.0
    t0, t1 = window
    out = np.zeros(grid.n_cells)
    if vmax > 0.0:
        lam = large_jump_rate(model, t1 - t0, 2.0 * model.L) * vmax
        n = int(rng.poisson(lam))
        u = rng.uniform(-model.L, model.L, n)
        z = sample_jump_sizes(model, n, rng)
        v = rng.uniform(0.0, vmax, n)
        cells = grid.cell_of(u)
        keep = v <= habs[cells]
        np.add.at(out, cells[keep], z[keep] * np.sign(h[cells[keep]]))
    out += model.cell_volume * small_jump_compensation(model) * habs * np.sign(h)
    if model.small_jump_completion and vmax > 0.0:
        sd = np.sqrt(model.cell_volume * small_jump_variance(model) * habs)
        out += np.sign(h) * sd * rng.normal(0.0, 1.0, grid.n_cells)
    return out


def _h_at_events(stream: JumpStream, field_values: np.ndarray, grid: Grid1D, H) -> np.ndarray:
    cells = grid.cell_of(stream.u)
    return np.asarray(H(np.asarray(field_values, dtype=float)[cells]), dtype=float)


def thinning_transform(
    stream: JumpStream,
    field_values: np.ndarray,
    grid: Grid1D,
    H,
    alpha: float,
    rng: Optional[np.random.Generator] = None,
    seed: Optional[int] = None,
) -> JumpStream:
    """Map noise atoms to marked atoms of the state-extended measure.

    An atom (s, z, u) with h = H(X(u)) != 0 becomes (s, z|h|, u, v) with
    v uniform on (0, |h|^alpha); atoms at zeros of H are re-emitted with v
    uniform on (0, 1).  The marked stream carries the same stochastic
    integral: sum z H(X(u)) f(u) over the input equals
    sum z' sgn(h) f(u) 1{v <= |h|^alpha} over the output, atom by atom.
    The inverse map (marked -> plain) divides by |h|; see
    :func:`project_thinned`.
    """
    if stream.mode == "thinned":
        raise DomainError("stream is already in thinned mode")
    if rng is None:
        rng = rng_for(0 if seed is None else seed, _DOMAIN_WINDOW, _float_bits(stream.window[0]), 1)
    h = _h_at_events(stream, field_values, grid, H)
    habs = np.abs(h)
    zero = habs == 0.0
    z_new = np.where(zero, stream.z, stream.z * habs)
    v = rng.uniform(size=len(stream)) * np.where(zero, 1.0, habs**alpha)
    s, z_new, u, v = _lexsort_events(stream.s.copy(), z_new, stream.u.copy(), v)
    return JumpStream(
        s, z_new, u, v,
        stream.window, stream.truncation, stream.domain_half_width, "thinned",
    )


def project_thinned(
    stream: JumpStream, field_values: np.ndarray, grid: Grid1D, H, alpha: float
) -> JumpStream:
    """Recover plain noise atoms from a marked stream (the reverse map).

    Where h = H(X(u)) != 0, atoms with mark v <= |h|^alpha are kept with
    size z/|h|; others are discarded.  Where h = 0, atoms with v in (0, 1)
    are kept unchanged.
    """
    if stream.mode != "thinned" or stream.v is None:
        raise DomainError("project_thinned expects a thinned-mode stream")
    h = _h_at_events(stream, field_values, grid, H)
    habs = np.abs(h)
    zero = habs == 0.0
    keep = np.where(zero, stream.v < 1.0, stream.v <= habs**alpha)
    z_new = np.where(zero, stream.z, stream.z / np.where(zero, 1.0, habs))[keep]
    s, z_new, u, _ = _lexsort_events(stream.s[keep].copy(), z_new, stream.u[keep].copy())
    return JumpStream(
        s, z_new, u, None,
        stream.window, stream.truncation, stream.domain_half_width, "jump_decomposition",
    )


def noise_functional(
    stream: JumpStream, field_values: np.ndarray, grid: Grid1D, H, alpha: float, f
) -> float:
    """Atomic part of the stochastic integral against a test function f.

    Plain streams contribute sum z H(X(u)) f(u); marked streams contribute
    sum z sgn(H(X(u))) f(u) over atoms with v <= |H(X(u))|^alpha.
    """
    if len(stream) == 0:
        return 0.0
    h = _h_at_events(stream, field_values, grid, H)
    fu = np.asarray(f(stream.u), dtype=float)
    if stream.mode == "thinned":
        habs = np.abs(h)
        accept = np.where(habs == 0.0, stream.v < 1.0, stream.v <= habs**alpha)
        return float(np.sum(stream.z[accept] * np.sign(h[accept]) * fu[accept]))
    return float(np.sum(stream.z * h * fu))
