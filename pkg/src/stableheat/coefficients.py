"""Coefficient pairs (G, H) and the uniqueness-condition gate.

The drift G must be Lipschitz, the noise coefficient H beta-Hoelder with
beta in (0, 1) and nondecreasing.  Exact verification of arbitrary user
functions is impossible, so the conditions are checked by randomized
sampling (1e5 pairs on [0, 100] by default).

The gate searches for an exponent delta > 0 with

    2 beta eta_c > 1 + 1/delta   and   alpha beta / (alpha - 1) > delta + 1,

where eta_c = 2/alpha - 1, under the side conditions p < 1 + alpha(alpha-1)/2
and, for p = alpha beta > 1, q > 3p/(3 - alpha).  For p = 1 admissibility
is equivalent to alpha < 4 - 2 sqrt(2); the gate also evaluates the
algebraic form p alpha^2 - 2p(p+3) alpha + 4p(p+1) > 0 and reports any
disagreement with the delta-search instead of resolving it silently.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .kernel import DomainError
from .noise import rng_for

DELTA_RESOLUTION = 1e-6
_CHECK_PAIRS = 100_000
_CHECK_UPPER = 100.0


@dataclass(frozen=True)
class CoefficientPair:
    """Drift G (Lipschitz, constant C_G) and noise coefficient H
    (beta-Hoelder, constant C_H, nondecreasing)."""

    G: Callable[[np.ndarray], np.ndarray]
    H: Callable[[np.ndarray], np.ndarray]
    C_G: float
    C_H: float
    beta: float
    monotone: bool = True
    name: str = ""

    def __post_init__(self):
        if not 0.0 < self.beta < 1.0:
            raise DomainError("beta must lie in (0, 1)")
        if self.C_G < 0 or self.C_H < 0:
            raise DomainError("coefficient constants must be nonnegative")

    def validate(self, seed: int = 0, n_pairs: int = _CHECK_PAIRS, slack: float = 1e-9) -> None:
        """Sampled checks of the Lipschitz, Hoelder and monotonicity conditions."""
        rng = rng_for(seed, 0x434F4546)
        x = rng.uniform(0.0, _CHECK_UPPER, n_pairs)
        y = rng.uniform(0.0, _CHECK_UPPER, n_pairs)
        d = np.abs(x - y)
        gx, gy = np.asarray(self.G(x), float), np.asarray(self.G(y), float)
        if np.any(np.abs(gx - gy) > self.C_G * d + slack):
            raise DomainError("sampled Lipschitz check failed for G")
        hx, hy = np.asarray(self.H(x), float), np.asarray(self.H(y), float)
        if np.any(np.abs(hx - hy) > self.C_H * d**self.beta + slack):
            raise DomainError("sampled Hoelder check failed for H")
        if self.monotone:
            lo, hi = np.minimum(x, y), np.maximum(x, y)
            hlo = np.asarray(self.H(lo), float)
            hhi = np.asarray(self.H(hi), float)
            if np.any(hlo > hhi + slack):
                raise DomainError("sampled monotonicity check failed for H")


def builtin_stable_branching(beta: float) -> CoefficientPair:
    """G = 0, H(x) = x^beta: the stable-branching case (p = alpha beta)."""
    if not 0.0 < beta < 1.0:
        raise DomainError("beta must lie in (0, 1)")
    return CoefficientPair(
        G=lambda x: np.zeros_like(np.asarray(x, dtype=float)),
        H=lambda x: np.power(np.maximum(np.asarray(x, dtype=float), 0.0), beta),
        C_G=0.0,
        C_H=1.0,
        beta=beta,
        monotone=True,
        name=f"power:{beta:g}",
    )


def _parse_name(spec: str) -> tuple[str, Optional[float]]:
    if ":" in spec:
        base, arg = spec.split(":", 1)
        return base, float(arg)
    return spec, None


def make_pair(drift: str = "zero", noise_coeff: str = "power:0.5", beta: Optional[float] = None) -> CoefficientPair:
    """Build a coefficient pair from config names.

    drift: "zero" | "linear[:rate]" | "lipschitz_demo"
    noise_coeff: "zero" | "power[:beta]" | "lipschitz_demo"
    """
    nbase, narg = _parse_name(noise_coeff)
    if beta is None:
        beta = narg if narg is not None else 0.5
    if nbase == "power":
        pair = builtin_stable_branching(narg if narg is not None else beta)
    elif nbase == "zero":
        pair = CoefficientPair(
            G=lambda x: np.zeros_like(np.asarray(x, dtype=float)),
            H=lambda x: np.zeros_like(np.asarray(x, dtype=float)),
            C_G=0.0, C_H=0.0, beta=beta, monotone=True, name="zero",
        )
    elif nbase == "lipschitz_demo":
        # H(x) = x/(1+x): bounded, nondecreasing; |H(x)-H(y)| <= min(|x-y|,1) <= |x-y|^b
        pair = CoefficientPair(
            G=lambda x: np.zeros_like(np.asarray(x, dtype=float)),
            H=lambda x: np.asarray(x, float) / (1.0 + np.asarray(x, float)),
            C_G=0.0, C_H=1.0, beta=beta, monotone=True, name="lipschitz_demo",
        )
    else:
        raise DomainError(f"unknown noise coefficient '{noise_coeff}'")

    dbase, darg = _parse_name(drift)
    if dbase == "zero":
        return pair
    if dbase == "linear":
        rate = -1.0 if darg is None else darg
        G = lambda x, r=rate: r * np.asarray(x, dtype=float)
        return CoefficientPair(G, pair.H, abs(rate), pair.C_H, pair.beta, pair.monotone,
                               name=f"linear:{rate:g}+{pair.name}")
    if dbase == "lipschitz_demo":
        G = lambda x: -np.asarray(x, float) / (1.0 + np.asarray(x, float))
        return CoefficientPair(G, pair.H, 1.0, pair.C_H, pair.beta, pair.monotone,
                               name=f"lipschitz_demo+{pair.name}")
    raise DomainError(f"unknown drift '{drift}'")


@dataclass(frozen=True)
class ParameterSet:
    """(alpha, beta) with p = alpha beta, optional integrability exponent q
    and optional pre-chosen delta."""

    alpha: float
    beta: float
    q: Optional[float] = None
    delta: Optional[float] = None

    def __post_init__(self):
        if not 1.0 < self.alpha < 2.0:
            raise DomainError("alpha must lie in (1, 2)")
        if not 0.0 < self.beta < 1.0:
            raise DomainError("beta must lie in (0, 1)")
        if self.p > 1.0 and self.q is not None and self.q <= 3.0 * self.p / (3.0 - self.alpha):
            raise DomainError("q must exceed 3p/(3 - alpha) when p > 1")

    @property
    def p(self) -> float:
        return self.alpha * self.beta


def holder_exponent_targets(alpha: float) -> tuple[float, float]:
    """(eta_c, eta_bar_c) = (2/alpha - 1, min(3/alpha - 1, 1)).

    The second exponent (regularity at a fixed spatial point) is reported
    for context only; the harness estimates eta_c.
    """
    if not 1.0 < alpha < 2.0:
        raise DomainError("alpha must lie in (1, 2)")
    return 2.0 / alpha - 1.0, min(3.0 / alpha - 1.0, 1.0)


@dataclass(frozen=True)
class GateResult:
    admissible: bool
    delta: Optional[float]
    interval: Optional[tuple[float, float]]
    reason: Optional[str]
    quadratic_value: float
    quadratic_admissible: bool
    disagreement: bool

    def __str__(self) -> str:
        if self.admissible:
            lo, hi = self.interval
            return f"admissible: delta={self.delta:.6f} (feasible interval ({lo:.6f}, {hi:.6f}))"
        return f"inadmissible: {self.reason}"


def uniqueness_gate(params: ParameterSet) -> GateResult:
    """Decide admissibility and return a witness delta (feasible-interval midpoint)."""
    a, b = params.alpha, params.beta
    p = params.p
    eta_c, _ = holder_exponent_targets(a)
    quad = p * (a * a - 2.0 * (p + 3.0) * a + 4.0 * (p + 1.0))

    def result(admissible, delta=None, interval=None, reason=None):
        q_adm = quad > 0.0
        return GateResult(admissible, delta, interval, reason, quad, q_adm,
                          disagreement=(admissible != q_adm))

    if not p < 1.0 + a * (a - 1.0) / 2.0:
        return result(False, reason="p >= 1 + alpha(alpha-1)/2")
    if p > 1.0:
        if params.q is None:
            return result(False, reason="p > 1 requires an integrability exponent q")
        if params.q <= 3.0 * p / (3.0 - a):
            return result(False, reason="q <= 3p/(3-alpha)")
    margin = 2.0 * b * eta_c - 1.0
    if margin <= 0.0:
        return result(False, reason="2*beta*eta_c <= 1")
    lo = 1.0 / margin
    hi = a * b / (a - 1.0) - 1.0
    if hi - lo <= DELTA_RESOLUTION:
        return result(False, reason="empty delta interval", )
    if params.delta is not None:
        if not lo < params.delta < hi:
            return result(False, reason=f"requested delta={params.delta} outside ({lo:.6f}, {hi:.6f})")
        return result(True, delta=params.delta, interval=(lo, hi))
    return result(True, delta=0.5 * (lo + hi), interval=(lo, hi))


def p1_closed_form_bound() -> float:
    """Critical alpha for p = 1: pathwise uniqueness iff alpha < 4 - 2 sqrt(2)."""
    return 4.0 - 2.0 * math.sqrt(2.0)
