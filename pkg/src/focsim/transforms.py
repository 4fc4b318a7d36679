"""Clarke and Park transforms between abc, alpha-beta-zero and dq frames.

Amplitude-invariant scaling (K = 2/3) throughout, so dq components equal
phase peak amplitudes. The d axis sits at electrical angle ``theta`` from the
alpha axis; q leads d by 90 degrees.

The ``_``-prefixed scalar kernels are numba-compiled and shared with the
closed-loop simulation kernel.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from numba import njit

SQRT3 = math.sqrt(3.0)
SQRT2 = math.sqrt(2.0)
K_AMPLITUDE = 2.0 / 3.0


@dataclass(frozen=True)
class AbcVector:
    a: float
    b: float
    c: float

    def __iter__(self):
        return iter((self.a, self.b, self.c))


@dataclass(frozen=True)
class AlphaBetaVector:
    alpha: float
    beta: float
    zero: float = 0.0

    def __iter__(self):
        return iter((self.alpha, self.beta, self.zero))


@dataclass(frozen=True)
class DqVector:
    d: float
    q: float

    def __iter__(self):
        return iter((self.d, self.q))

    def __abs__(self):
        return math.hypot(self.d, self.q)


@njit(cache=True)
def _clarke(a, b, c):
    alpha = K_AMPLITUDE * (a - 0.5 * b - 0.5 * c)
    beta = K_AMPLITUDE * (0.5 * SQRT3) * (b - c)
    zero = K_AMPLITUDE * (a + b + c) / SQRT2
    return alpha, beta, zero


@njit(cache=True)
def _inverse_clarke(alpha, beta, zero):
    # z is the per-phase common-mode component (a+b+c)/3
    z = zero / SQRT2
    a = alpha + z
    b = -0.5 * alpha + 0.5 * SQRT3 * beta + z
    c = -0.5 * alpha - 0.5 * SQRT3 * beta + z
    return a, b, c


@njit(cache=True)
def _park(alpha, beta, theta):
    ct = math.cos(theta)
    st = math.sin(theta)
    return ct * alpha + st * beta, -st * alpha + ct * beta


@njit(cache=True)
def _inverse_park(d, q, theta):
    ct = math.cos(theta)
    st = math.sin(theta)
    return ct * d - st * q, st * d + ct * q


def clarke(v: AbcVector) -> AlphaBetaVector:
    return AlphaBetaVector(*_clarke(float(v.a), float(v.b), float(v.c)))


def inverse_clarke(v: AlphaBetaVector) -> AbcVector:
    return AbcVector(*_inverse_clarke(float(v.alpha), float(v.beta), float(v.zero)))


def park(v: AlphaBetaVector, theta_e: float) -> DqVector:
    """Rotate a stationary-frame vector by ``-theta_e`` into the rotor frame.

    Composed with :func:`clarke` this is the full abc-to-dq Park transform
    (with the conventional ``theta + 2*pi/3`` column for phase c).
    """
    if not math.isfinite(theta_e):
        raise ValueError("theta_e must be finite")
    return DqVector(*_park(float(v.alpha), float(v.beta), float(theta_e)))


def inverse_park(v: DqVector, theta_e: float) -> AlphaBetaVector:
    if not math.isfinite(theta_e):
        raise ValueError("theta_e must be finite")
    return AlphaBetaVector(*_inverse_park(float(v.d), float(v.q), float(theta_e)))


def abc_to_dq(v: AbcVector, theta_e: float) -> DqVector:
    return park(clarke(v), theta_e)


def dq_to_abc(v: DqVector, theta_e: float) -> AbcVector:
    return inverse_clarke(inverse_park(v, theta_e))
