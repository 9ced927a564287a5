"""Scalar loss and kernel functions shared by all solvers.

The central object is the generalized Gaussian density ``g(e) = gamma *
exp(-lam * |e|**alpha)`` with shape ``alpha`` and bandwidth ``beta``.  Its
induced loss ``g(0) - g(e)`` is bounded, which is what makes the multi-view
solvers in this package robust to gross outliers.  The Cauchy loss and plain
L1/L2 weights used by the baseline solvers live here as well.
"""

import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "GgdParams",
    "KernelSize",
    "CauchyScale",
    "ggd",
    "gc_loss",
    "cauchy_loss",
    "correntropy_kernel",
]


@dataclass(frozen=True)
class GgdParams:
    """Shape/bandwidth parameters of the generalized Gaussian density.

    ``alpha`` is the shape exponent (2 recovers a Gaussian kernel with
    ``sigma = beta / sqrt(2)``), ``beta`` the bandwidth in the units of the
    error being compared.
    """

    alpha: float
    beta: float

    def __post_init__(self):
        if not self.alpha > 0:
            raise ValueError(f"alpha must be > 0, got {self.alpha}")
        if not self.beta > 0:
            raise ValueError(f"beta must be > 0, got {self.beta}")

    @property
    def lam(self) -> float:
        """Kernel decay rate 1 / beta**alpha."""
        return 1.0 / self.beta**self.alpha

    @property
    def gamma(self) -> float:
        """Normalizing constant alpha / (2 * beta * Gamma(1/alpha))."""
        return self.alpha / (2.0 * self.beta * math.gamma(1.0 / self.alpha))


@dataclass(frozen=True)
class KernelSize:
    """Bandwidth of a Gaussian kernel, in the units of the error."""

    sigma: float

    def __post_init__(self):
        if not self.sigma > 0:
            raise ValueError(f"sigma must be > 0, got {self.sigma}")


@dataclass(frozen=True)
class CauchyScale:
    """Scale of the Cauchy loss log(1 + e**2 / c**2)."""

    c: float

    def __post_init__(self):
        if not self.c > 0:
            raise ValueError(f"c must be > 0, got {self.c}")


def _abs_pow(e, alpha):
    # |e|**alpha via exp(alpha*log|e|); e == 0 short-circuited to 0 so that
    # non-integer alpha never sees log(0).
    e = np.asarray(e, dtype=float)
    out = np.zeros_like(e)
    nz = e != 0
    out[nz] = np.exp(alpha * np.log(np.abs(e[nz])))
    return out


def _maybe_scalar(x, arr):
    return float(arr) if np.isscalar(x) or np.ndim(x) == 0 else arr


def ggd(e, p: GgdParams):
    """Generalized Gaussian density gamma * exp(-lam * |e|**alpha).

    Even in ``e``, strictly positive, maximal at ``e = 0`` where it equals
    ``p.gamma``.  Accepts scalars or arrays.
    """
    val = p.gamma * np.exp(-p.lam * _abs_pow(e, p.alpha))
    return _maybe_scalar(e, val)


def gc_loss(e, p: GgdParams):
    """Bounded loss gamma * (1 - exp(-lam * |e|**alpha)) = ggd(0) - ggd(e).

    Zero iff ``e == 0``, monotone nondecreasing in ``|e|``, bounded above by
    ``p.gamma``.
    """
    val = p.gamma * (-np.expm1(-p.lam * _abs_pow(e, p.alpha)))
    return _maybe_scalar(e, val)


def cauchy_loss(e, s: CauchyScale):
    """Cauchy loss log(1 + e**2 / c**2); unbounded, zero iff ``e == 0``."""
    e = np.asarray(e, dtype=float)
    val = np.log1p((e / s.c) ** 2)
    return _maybe_scalar(e, val)


def correntropy_kernel(e, sigma: float):
    """Unnormalized Gaussian kernel exp(-e**2 / (2 * sigma**2)).

    This is the form all solver objectives use; the ggd normalizing constant
    is deliberately left out.
    """
    if not sigma > 0:
        raise ValueError(f"sigma must be > 0, got {sigma}")
    e = np.asarray(e, dtype=float)
    val = np.exp(-(e * e) / (2.0 * sigma * sigma))
    return _maybe_scalar(e, val)
