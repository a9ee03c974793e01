"""Diagonal Hilbert-space calculus on the eigenbasis of a positive operator.

Elements of H are arrays of eigen-coefficients (last axis = mode index).
Mode ``j`` is stored at index ``j`` for ``j = 0 .. modes-1`` and the
projection ``P^n`` keeps the first ``n`` coefficients.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .exceptions import ParameterError, ShapeError

__all__ = [
    "Spectrum",
    "check_power",
    "apply_frac_power",
    "h_beta_norm_sq",
    "project",
    "projection_gap_norm",
]


@dataclass(frozen=True, eq=False)
class Spectrum:
    """Ascending, strictly positive eigenvalues of the generator."""

    lambdas: np.ndarray

    def __post_init__(self):
        lam = np.asarray(self.lambdas, dtype=float).copy()
        if lam.ndim != 1 or lam.size == 0:
            raise ParameterError("lambdas must be a non-empty 1-d sequence")
        if not np.all(np.isfinite(lam)) or lam[0] <= 0 or np.any(np.diff(lam) < 0):
            raise ParameterError("lambdas must be positive and non-decreasing")
        lam.setflags(write=False)
        object.__setattr__(self, "lambdas", lam)

    @property
    def modes(self) -> int:
        return self.lambdas.size

    @classmethod
    def dirichlet_laplacian(cls, modes: int) -> "Spectrum":
        """Eigenvalues ``(j+1)^2 pi^2`` of -d^2/dx^2 on (0, 1)."""
        if modes < 1:
            raise ParameterError("modes must be >= 1")
        j = np.arange(1, modes + 1)
        return cls(j**2 * np.pi**2)

    def power_norm(self, exponent: float) -> float:
        """Operator norm of A^exponent for exponent <= 0 (attained at the smallest eigenvalue)."""
        if exponent > 0:
            raise ParameterError("power_norm is only bounded for non-positive exponents")
        return float(self.lambdas[0] ** exponent)

    def tail_factor(self, beta: float, eta: float) -> float:
        """lambda_{modes}^{-2(eta-beta)} proxy for the truncated tail, using the last mode."""
        return float(self.lambdas[-1] ** (-2.0 * (eta - beta)))

    def _check(self, v: np.ndarray) -> np.ndarray:
        v = np.asarray(v, dtype=float)
        if v.shape[-1] != self.modes:
            raise ShapeError(f"expected {self.modes} coefficients, got {v.shape[-1]}")
        return v


def check_power(exponent: float) -> float:
    exponent = float(exponent)
    if not -1.0 <= exponent <= 1.0:
        raise ParameterError(f"fractional power must lie in [-1, 1], got {exponent}")
    return exponent


def apply_frac_power(sp: Spectrum, v, exponent: float) -> np.ndarray:
    """A^exponent v, i.e. ``coeffs[j] * lambda_j**exponent``."""
    exponent = check_power(exponent)
    v = sp._check(v)
    if exponent == 0.0:
        return v.copy()
    return v * sp.lambdas**exponent


def h_beta_norm_sq(sp: Spectrum, v, beta: float) -> np.ndarray | float:
    """Squared H_beta norm ``sum_j lambda_j^(2 beta) coeffs_j^2`` over the last axis."""
    beta = check_power(beta)
    if beta < 0:
        raise ParameterError("beta must be non-negative")
    v = sp._check(v)
    out = np.sum(sp.lambdas ** (2.0 * beta) * v**2, axis=-1)
    return float(out) if np.ndim(out) == 0 else out


def project(v, n: int) -> np.ndarray:
    """Keep the first ``n`` coefficients, zero the rest."""
    v = np.asarray(v, dtype=float)
    modes = v.shape[-1]
    if not 0 <= n <= modes:
        raise ParameterError(f"n must lie in [0, {modes}], got {n}")
    out = v.copy()
    out[..., n:] = 0.0
    return out


def projection_gap_norm(sp: Spectrum, v, n: int, m: int, beta: float, eta: float) -> float:
    """``||A^(beta-eta) (P^n - P^m) v||^2``, summed over modes ``m .. n-1``.

    Bounded by ``lambda_m^(-2(eta-beta)) ||v||^2``.
    """
    v = sp._check(v)
    if not 0 <= m <= n <= sp.modes:
        raise ParameterError("need 0 <= m <= n <= modes")
    if not 0.0 <= beta < eta <= 1.0:
        raise ParameterError("need 0 <= beta < eta <= 1")
    lam = sp.lambdas[m:n]
    return float(np.sum(lam ** (2.0 * (beta - eta)) * v[..., m:n] ** 2))
