"""Q-Wiener paths, left-point Ito sums and the maximal-inequality check.

Streams are reproducible under parallel execution: sample ``i`` of an
ensemble with master seed ``s`` uses ``derive_seed(s, i)``, which depends
only on ``(s, i)``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, NamedTuple

import numpy as np

from .exceptions import InsufficientDataError, ParameterError, ShapeError

__all__ = [
    "CovarianceSpec",
    "WienerPath",
    "Lemma21Result",
    "derive_seed",
    "check_grid",
    "sample_wiener",
    "sample_ensemble",
    "ito_integral",
    "ito_cumulative",
    "integrand_op_norm_sq",
    "lemma21_check",
]


def check_grid(grid) -> np.ndarray:
    g = np.asarray(grid, dtype=float)
    if g.ndim != 1 or g.size < 2:
        raise ParameterError("grid needs at least two points")
    if g[0] != 0.0 or np.any(np.diff(g) <= 0):
        raise ParameterError("grid must start at 0 and be strictly increasing")
    return g


@dataclass(frozen=True, eq=False)
class CovarianceSpec:
    """Eigenvalues ``q_j`` of a trace-class covariance ``Q`` in the basis ``e_j``.

    These are the covariance eigenvalues, not those of the generator ``A``;
    the two share a symbol in the source notation.
    """

    q_eigs: np.ndarray

    def __post_init__(self):
        q = np.asarray(self.q_eigs, dtype=float).copy()
        if q.ndim != 1 or q.size == 0:
            raise ParameterError("q_eigs must be a non-empty 1-d sequence")
        if not np.all(np.isfinite(q)) or np.any(q < 0):
            raise ParameterError("q_eigs must be finite and non-negative")
        q.setflags(write=False)
        object.__setattr__(self, "q_eigs", q)

    @property
    def modes(self) -> int:
        return self.q_eigs.size

    @property
    def trace(self) -> float:
        return float(self.q_eigs.sum())


@dataclass(frozen=True, eq=False)
class WienerPath:
    """One Q-Wiener trajectory: ``increments[i, j] = sqrt(q_j) (beta_j(t_{i+1}) - beta_j(t_i))``."""

    grid: np.ndarray
    increments: np.ndarray
    seed: int

    def __post_init__(self):
        g = check_grid(self.grid)
        inc = np.asarray(self.increments, dtype=float)
        if inc.ndim != 2 or inc.shape[0] != g.size - 1:
            raise ShapeError("increments must have shape (len(grid) - 1, modes)")
        g = g.copy()
        inc = inc.copy()
        g.setflags(write=False)
        inc.setflags(write=False)
        object.__setattr__(self, "grid", g)
        object.__setattr__(self, "increments", inc)

    @property
    def modes(self) -> int:
        return self.increments.shape[1]

    def values(self) -> np.ndarray:
        """``W(t_i)`` for every node, starting from zero."""
        out = np.zeros((self.grid.size, self.modes))
        np.cumsum(self.increments, axis=0, out=out[1:])
        return out


class Lemma21Result(NamedTuple):
    lhs: float
    rhs: float
    lhs_stderr: float


def derive_seed(master_seed: int, index: int) -> int:
    """64-bit seed for sample ``index`` of an ensemble with ``master_seed``."""
    if master_seed < 0 or index < 0:
        raise ParameterError("seeds and indices must be non-negative")
    ss = np.random.SeedSequence(entropy=int(master_seed), spawn_key=(int(index),))
    return int(ss.generate_state(1, dtype=np.uint64)[0])


def sample_wiener(cov: CovarianceSpec, grid, seed: int) -> WienerPath:
    """Independent increments with variance ``q_j * dt_i``, drawn step-major from PCG64(seed)."""
    g = check_grid(grid)
    rng = np.random.default_rng(int(seed))
    xi = rng.standard_normal((g.size - 1, cov.modes))
    inc = xi * np.sqrt(np.diff(g))[:, None] * np.sqrt(cov.q_eigs)
    return WienerPath(g, inc, int(seed))


def sample_ensemble(cov: CovarianceSpec, grid, master_seed: int, samples: int) -> list[WienerPath]:
    return [sample_wiener(cov, grid, derive_seed(master_seed, i)) for i in range(samples)]


def _contract(integrand: np.ndarray, dW: np.ndarray) -> np.ndarray:
    """Per-step ``zeta_i dW_i``: diagonal ``(steps, modes)`` or matrix ``(steps, out, modes)``."""
    if integrand.ndim == 2:
        if integrand.shape != dW.shape:
            raise ShapeError(f"diagonal integrand shape {integrand.shape} != {dW.shape}")
        return integrand * dW
    if integrand.ndim == 3:
        if integrand.shape[0] != dW.shape[0] or integrand.shape[2] != dW.shape[1]:
            raise ShapeError("matrix integrand must have shape (steps, out, noise_modes)")
        return np.einsum("iok,ik->io", integrand, dW)
    raise ShapeError("integrand must be 2-d (diagonal) or 3-d (matrix)")


def ito_cumulative(path: WienerPath, integrand) -> np.ndarray:
    """Running left-point sums ``I(t_k) = sum_{i<k} zeta(t_i) dW_i``; row 0 is zero."""
    z = np.asarray(integrand, dtype=float)
    steps = _contract(z, path.increments)
    out = np.zeros((steps.shape[0] + 1, steps.shape[1]))
    np.cumsum(steps, axis=0, out=out[1:])
    return out


def ito_integral(path: WienerPath, integrand) -> np.ndarray:
    """Left-point Ito sum ``sum_i zeta(t_i) dW_i`` over the whole grid.

    ``integrand[i]`` is the value at the left node ``t_i``; a 2-d array acts
    diagonally (noise mode ``j`` into coefficient ``j``), a 3-d array as a
    matrix per step.
    """
    z = np.asarray(integrand, dtype=float)
    return _contract(z, path.increments).sum(axis=0)


def integrand_op_norm_sq(integrand) -> np.ndarray:
    """Squared operator norm of ``zeta(t_i)`` for every step."""
    z = np.asarray(integrand, dtype=float)
    if z.ndim == 2:
        return np.max(z**2, axis=1)
    if z.ndim == 3:
        return np.array([np.linalg.norm(m, 2) ** 2 for m in z])
    raise ShapeError("integrand must be 2-d (diagonal) or 3-d (matrix)")


def lemma21_check(
    cov: CovarianceSpec,
    grid,
    integrand: np.ndarray | Callable[[WienerPath], np.ndarray],
    samples: int,
    seed: int = 0,
) -> Lemma21Result:
    """Monte-Carlo check of ``E sup_t ||int_0^t zeta dW||^2 <= 4 Tr(Q) int_0^T E||zeta||^2 dt``.

    ``integrand`` is either a fixed array or a callable receiving the sample's
    path and returning a non-anticipating array. The norm of ``zeta`` on the
    right is the operator norm, for which the Tr(Q) factor yields a valid
    bound (see the decisions ledger). Time integrals use the same left-point
    rule as the Ito sum.
    """
    if samples < 1000:
        raise InsufficientDataError("lemma21_check needs at least 1000 samples")
    g = check_grid(grid)
    dt = np.diff(g)
    sups = np.empty(samples)
    quad = np.empty(samples)
    for i, path in enumerate(sample_ensemble(cov, g, seed, samples)):
        z = integrand(path) if callable(integrand) else integrand
        run = ito_cumulative(path, z)
        sups[i] = np.max(np.sum(run**2, axis=1))
        quad[i] = float(np.dot(dt, integrand_op_norm_sq(z)))
    lhs = float(sups.mean())
    rhs = 4.0 * cov.trace * float(quad.mean())
    return Lemma21Result(lhs, rhs, float(sups.std(ddof=1) / np.sqrt(samples)))
