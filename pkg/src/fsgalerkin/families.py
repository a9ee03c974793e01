"""Fractional cosine, sine and Riemann-Liouville families of a diagonal generator.

For ``A`` with eigenvalues ``lambda_j`` the families act coefficient-wise:

* ``C(s)``: ``E_{alpha,1}(-lambda s^alpha)``
* ``S(s)``: ``s E_{alpha,2}(-lambda s^alpha)``
* ``P(s)``: ``s^(alpha-1) E_{alpha,alpha}(-lambda s^alpha)``
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .exceptions import DomainError, ParameterError
from .fractional_calculus import mittag_leffler
from .spectral import Spectrum

__all__ = [
    "FamilyParams",
    "BoundEstimate",
    "cosine_factors",
    "sine_factors",
    "rl_factors",
    "cosine_apply",
    "sine_apply",
    "rl_apply",
    "estimate_bounds",
    "rl_moments",
]


@dataclass(frozen=True, eq=False)
class FamilyParams:
    """Order ``alpha`` in (1, 2] together with the generator spectrum."""

    alpha: float
    spectrum: Spectrum

    def __post_init__(self):
        a = float(self.alpha)
        if not 1.0 < a <= 2.0:
            raise ParameterError(f"alpha must lie in (1, 2], got {a}")
        object.__setattr__(self, "alpha", a)


@dataclass(frozen=True)
class BoundEstimate:
    """Grid estimates of ``M = sup ||C||`` and ``rho = sup ||A P||``."""

    M: float
    rho: float
    horizon: float
    grid: np.ndarray
    argmax_rho: tuple[float, int]


def _times(s) -> np.ndarray:
    s = np.asarray(s, dtype=float)
    if np.any(s < 0) or not np.all(np.isfinite(s)):
        raise DomainError("family times must be finite and non-negative")
    return s


def _ml_grid(fp: FamilyParams, s: np.ndarray, beta: float) -> np.ndarray:
    """``E_{alpha,beta}(-lambda_j s^alpha)`` with shape ``s.shape + (modes,)``."""
    z = -np.multiply.outer(s**fp.alpha, fp.spectrum.lambdas)
    return mittag_leffler(z, fp.alpha, beta)


def cosine_factors(fp: FamilyParams, s) -> np.ndarray:
    s = _times(s)
    return _ml_grid(fp, s, 1.0)


def sine_factors(fp: FamilyParams, s) -> np.ndarray:
    s = _times(s)
    return s[..., None] * _ml_grid(fp, s, 2.0)


def rl_factors(fp: FamilyParams, s) -> np.ndarray:
    """Diagonal of ``P(s)``; zero at ``s = 0`` (the kernel is integrable there)."""
    s = _times(s)
    with np.errstate(divide="ignore"):
        pref = np.where(s > 0, s ** (fp.alpha - 1.0), 0.0)
    return pref[..., None] * _ml_grid(fp, s, fp.alpha)


def cosine_apply(fp: FamilyParams, s: float, v) -> np.ndarray:
    """``C(s) v`` for coefficient array ``v`` (last axis = modes)."""
    v = fp.spectrum._check(v)
    return cosine_factors(fp, float(s)) * v


def sine_apply(fp: FamilyParams, s: float, v) -> np.ndarray:
    v = fp.spectrum._check(v)
    return sine_factors(fp, float(s)) * v


def rl_apply(fp: FamilyParams, s: float, v) -> np.ndarray:
    v = fp.spectrum._check(v)
    return rl_factors(fp, float(s)) * v


def estimate_bounds(fp: FamilyParams, horizon: float, grid_points: int = 256) -> BoundEstimate:
    """Estimate ``M`` and ``rho`` by maximising over a time grid and all modes.

    The grid is the union of a uniform grid and a geometric one clustered at
    zero; ``||A P(s)||`` peaks where ``lambda s^alpha = O(1)``, which for the
    high modes lies far inside the first uniform cell.
    """
    if horizon <= 0:
        raise ParameterError("horizon must be positive")
    if grid_points < 16:
        raise ParameterError("grid_points must be >= 16")
    lam_max = fp.spectrum.lambdas[-1]
    s_low = min(horizon, lam_max ** (-1.0 / fp.alpha)) * 1e-3
    grid = np.unique(
        np.concatenate(
            [np.linspace(0.0, horizon, grid_points), np.geomspace(s_low, horizon, grid_points)]
        )
    )
    C = np.abs(cosine_factors(fp, grid))
    AP = np.abs(rl_factors(fp, grid)) * fp.spectrum.lambdas
    i, j = np.unravel_index(np.argmax(AP), AP.shape)
    return BoundEstimate(
        M=float(C.max()),
        rho=float(AP.max()),
        horizon=float(horizon),
        grid=grid,
        argmax_rho=(float(grid[i]), int(j)),
    )


@lru_cache(maxsize=64)
def _moment_table(alpha: float, lambdas: tuple, h: float, steps: int):
    t = h * np.arange(steps + 1)
    lam = np.asarray(lambdas)
    z = -np.multiply.outer(t**alpha, lam)
    e1 = mittag_leffler(z, alpha, alpha + 1.0)
    e2 = mittag_leffler(z, alpha, alpha + 2.0)
    m0 = (t**alpha)[:, None] * e1
    m1 = (t ** (alpha + 1.0))[:, None] * (e1 - e2)
    m0.setflags(write=False)
    m1.setflags(write=False)
    return m0, m1


def rl_moments(fp: FamilyParams, h: float, steps: int) -> tuple[np.ndarray, np.ndarray]:
    """Moments of the ``P`` kernel on the lattice ``t_k = k h``, ``k = 0..steps``.

    Returns ``(m0, m1)`` of shape ``(steps+1, modes)`` with
    ``m0(t) = int_0^t P(u) du = t^alpha E_{alpha,alpha+1}`` and
    ``m1(t) = int_0^t u P(u) du = t^(alpha+1) (E_{alpha,alpha+1} - E_{alpha,alpha+2})``.
    """
    if h <= 0 or steps < 0:
        raise ParameterError("need h > 0 and steps >= 0")
    return _moment_table(fp.alpha, tuple(fp.spectrum.lambdas.tolist()), float(h), int(steps))
