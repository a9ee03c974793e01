"""Picard iteration of the Galerkin map ``phi_n`` on an impulse-aligned grid.

The outer convolution ``int P(s - r) F(r) dr`` uses product integration:
``F`` is piecewise linear between nodes and integrated exactly against the
kernel moments from :func:`fsgalerkin.families.rl_moments`. The inner
stochastic convolution ``Z(r) = int_0^r a(r - u) N dW(u)`` is a left-point Ito
sum over the whole history, impulse intervals included.
"""

from __future__ import annotations

import io
import math
from dataclasses import dataclass, replace
from functools import lru_cache
from typing import TextIO

import numpy as np

from .exceptions import ConvergenceError, ParameterError, ShapeError
from .families import FamilyParams, cosine_factors, rl_moments, sine_factors
from .noise import WienerPath
from .problem import ConstantsLedger, ImpulseSchedule, ProblemSpec
from .spectral import h_beta_norm_sq, project

__all__ = [
    "Segment",
    "TimeGrid",
    "PathSolution",
    "PicardConfig",
    "apply_phi",
    "homogeneous_path",
    "solve",
    "residual_check",
    "fg_project",
    "sup_beta_distance",
    "write_csv",
    "solution_csv",
]


@dataclass(frozen=True)
class Segment:
    """Nodes ``start..stop`` (inclusive) of one uniform subinterval.

    ``kind`` is ``"evolve"`` for ``(sigma_k, s_{k+1}]`` (``k = 0..q``) or
    ``"impulse"`` for ``(s_k, sigma_k]`` (``k = 1..q``). The start node
    belongs to the preceding segment.
    """

    kind: str
    k: int
    start: int
    stop: int
    h: float

    @property
    def steps(self) -> int:
        return self.stop - self.start


@dataclass(frozen=True, eq=False)
class TimeGrid:
    schedule: ImpulseSchedule
    steps_per_interval: int
    nodes: np.ndarray
    segments: tuple[Segment, ...]

    @classmethod
    def build(cls, schedule: ImpulseSchedule, steps_per_interval: int) -> "TimeGrid":
        if steps_per_interval < 1:
            raise ParameterError("steps_per_interval must be >= 1")
        pieces = [np.array([0.0])]
        segments = []
        evo = schedule.evolution_intervals()
        imp = schedule.impulse_intervals()
        idx = 0
        for k in range(schedule.q + 1):
            parts = [("evolve", k, evo[k])]
            if k < schedule.q:
                parts.append(("impulse", k + 1, imp[k]))
            for kind, kk, (lo, hi) in parts:
                pts = np.linspace(lo, hi, steps_per_interval + 1)
                pts[-1] = hi
                pieces.append(pts[1:])
                segments.append(Segment(kind, kk, idx, idx + steps_per_interval, (hi - lo) / steps_per_interval))
                idx += steps_per_interval
        nodes = np.concatenate(pieces)
        nodes.setflags(write=False)
        return cls(schedule, int(steps_per_interval), nodes, tuple(segments))

    @property
    def size(self) -> int:
        return self.nodes.size

    def node_of(self, t: float) -> int:
        i = int(np.searchsorted(self.nodes, t))
        if i >= self.size or self.nodes[i] != t:
            raise ParameterError(f"{t} is not a grid node")
        return i

    def impulse_mask(self) -> np.ndarray:
        mask = np.zeros(self.size, dtype=bool)
        for seg in self.segments:
            if seg.kind == "impulse":
                mask[seg.start + 1 : seg.stop + 1] = True
        return mask

    def describe(self) -> str:
        bps = ";".join(f"{v:.17g}" for v in (0.0,) + tuple(
            x for pair in zip(self.schedule.s_points, self.schedule.sigma_points) for x in pair
        ) + (self.schedule.horizon,))
        return f"steps_per_interval={self.steps_per_interval} breakpoints={bps}"


@dataclass(frozen=True)
class PicardConfig:
    tol: float = 1e-10
    max_iter: int = 60

    def __post_init__(self):
        if not self.tol > 0:
            raise ParameterError("tol must be positive")
        if self.max_iter < 1:
            raise ParameterError("max_iter must be >= 1")


@dataclass(frozen=True, eq=False)
class PathSolution:
    """Node states (left limits at breakpoints) of one sample.

    ``derivatives`` holds ``h^2_k`` on impulse nodes and NaN elsewhere.
    ``history`` lists the sup-node ``H_beta`` Picard differences.
    """

    grid: TimeGrid
    states: np.ndarray
    derivatives: np.ndarray
    galerkin_n: int
    sample_seed: int
    history: tuple[float, ...] = ()
    converged: bool = False
    flags: tuple[str, ...] = ()

    def coefficients(self, j: int) -> np.ndarray:
        """Time series ``<y(s), psi_j>``."""
        return self.states[:, j].copy()


class _Phi:
    """Precomputed pieces of ``phi_n`` for one (problem, grid, path, n)."""

    def __init__(self, n: int, spec: ProblemSpec, wiener: WienerPath | None, grid: TimeGrid):
        if not 0 <= n <= spec.modes:
            raise ParameterError(f"n must lie in [0, {spec.modes}]")
        self.n, self.spec, self.grid = n, spec, grid
        t = grid.nodes
        if wiener is not None:
            if wiener.grid.shape != t.shape or np.any(wiener.grid != t):
                raise ShapeError("Wiener path grid does not match the time grid")
            if wiener.modes != spec.modes:
                raise ShapeError("Wiener path modes do not match the problem")
            self.dW = np.asarray(wiener.increments)
            lag = t[:, None] - t[None, :-1]
            ker = np.where(lag > 0, np.asarray(spec.nonlin.a(np.maximum(lag, 0.0)), dtype=float), 0.0)
            self.kernel = ker
        else:
            self.dW = None
        fp = spec.families
        self.evolve = {}
        for seg in grid.segments:
            if seg.kind == "evolve":
                self.evolve[seg.k] = _segment_operators(fp, seg.h, seg.steps)

    def forcing(self, Y: np.ndarray) -> np.ndarray:
        """``K_n(r, y(r)) + Z(r)`` at every node."""
        t = self.grid.nodes
        Yn = project(Y, self.n)
        F = np.asarray(self.spec.nonlin.K(t, Yn), dtype=float)
        if self.dW is not None:
            Nv = np.asarray(self.spec.nonlin.N(t[:-1], Yn[:-1]), dtype=float)
            F = F + self.kernel @ (Nv * self.dW)
        return F

    def impulse(self, k: int, times: np.ndarray, x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        xn = project(x, self.n)
        h1 = np.asarray(self.spec.nonlin.h1[k - 1](times, xn), dtype=float)
        h2 = np.asarray(self.spec.nonlin.h2[k - 1](times, xn), dtype=float)
        return h1, h2

    def sweep(self, Y: np.ndarray | None) -> tuple[np.ndarray, np.ndarray]:
        """One application of ``phi_n`` to ``Y``; ``Y=None`` gives the homogeneous evolution.

        In the homogeneous case the impulse maps read the left limits of the
        output itself, so the result is the linear evolution extended through
        the impulses.
        """
        g, spec = self.grid, self.spec
        t = g.nodes
        out = np.empty((g.size, spec.modes))
        der = np.full((g.size, spec.modes), np.nan)
        out[0] = spec.y0
        F = self.forcing(Y) if Y is not None else None
        launch = {0: (spec.y0, spec.z0)}
        for seg in g.segments:
            a, b = seg.start, seg.stop
            if seg.kind == "impulse":
                src = Y if Y is not None else out
                times = t[a + 1 : b + 1]
                h1, h2 = self.impulse(seg.k, times, src[a])
                out[a + 1 : b + 1] = h1
                der[a + 1 : b + 1] = h2
                launch[seg.k] = (h1[-1], h2[-1])
            else:
                C, S, W = self.evolve[seg.k]
                y_init, v_init = launch[seg.k]
                block = C[1:] * y_init + S[1:] * v_init
                if F is not None:
                    block = block + np.einsum("lim,im->lm", W[1:], F[a : b + 1])
                out[a + 1 : b + 1] = block
        return out, der


@lru_cache(maxsize=32)
def _segment_cached(alpha: float, lambdas: tuple, h: float, steps: int):
    from .spectral import Spectrum

    fp = FamilyParams(alpha, Spectrum(np.array(lambdas)))
    lags = h * np.arange(steps + 1)
    C = cosine_factors(fp, lags)
    S = sine_factors(fp, lags)
    m0, m1 = rl_moments(fp, h, steps)
    dm0, dm1 = np.diff(m0, axis=0), np.diff(m1, axis=0)
    d = np.arange(steps)[:, None]
    w_lo = (dm1 - d * h * dm0) / h  # weight on F at the left end of the cell
    w_hi = ((d + 1) * h * dm0 - dm1) / h  # weight on F at the right end
    W = np.zeros((steps + 1, steps + 1, len(lambdas)))
    for lidx in range(1, steps + 1):
        dd = np.arange(lidx)
        W[lidx, lidx - dd] += w_hi[:lidx]
        W[lidx, lidx - dd - 1] += w_lo[:lidx]
    for arr in (C, S, W):
        arr.setflags(write=False)
    return C, S, W


def _segment_operators(fp: FamilyParams, h: float, steps: int):
    """Cosine/sine factors on the segment lags and the product-integration tensor."""
    return _segment_cached(fp.alpha, tuple(fp.spectrum.lambdas.tolist()), float(h), int(steps))


def sup_beta_distance(spec: ProblemSpec, A: np.ndarray, B: np.ndarray) -> float:
    """``max_nodes ||A - B||_beta``."""
    return float(np.sqrt(np.max(h_beta_norm_sq(spec.spectrum, A - B, spec.beta))))


def _wrap(grid, states, der, n, seed, **kw) -> PathSolution:
    states = np.ascontiguousarray(states)
    states.setflags(write=False)
    der.setflags(write=False)
    return PathSolution(grid, states, der, n, seed, **kw)


def _seed(wiener):
    return -1 if wiener is None else wiener.seed


def homogeneous_path(n: int, spec: ProblemSpec, grid: TimeGrid) -> PathSolution:
    """``C y0 + S z0`` extended through the impulses (the initial Picard iterate)."""
    states, der = _Phi(n, spec, None, grid).sweep(None)
    return _wrap(grid, states, der, n, -1)


def apply_phi(n: int, spec: ProblemSpec, wiener: WienerPath | None, grid: TimeGrid, y: PathSolution) -> PathSolution:
    """One application of ``phi_n``. ``wiener=None`` drops the stochastic term."""
    if y.states.shape != (grid.size, spec.modes):
        raise ShapeError("input path does not match the grid and problem")
    states, der = _Phi(n, spec, wiener, grid).sweep(y.states)
    return _wrap(grid, states, der, n, _seed(wiener))


def solve(
    n: int,
    spec: ProblemSpec,
    wiener: WienerPath | None,
    grid: TimeGrid,
    cfg: PicardConfig = PicardConfig(),
    ledger: ConstantsLedger | None = None,
) -> PathSolution:
    """Picard iteration from the homogeneous evolution.

    Stops when the sup-node ``H_beta`` difference drops to ``cfg.tol``.
    Failing to converge raises :class:`ConvergenceError` when the ledger
    certifies ``D < 1``; otherwise the result is flagged. Iterates leaving
    the ball of radius ``R`` (per path, sup over nodes) are also flagged.
    """
    op = _Phi(n, spec, wiener, grid)
    y, _ = op.sweep(None)
    history = []
    flags = set()
    der = None
    converged = False
    for _ in range(cfg.max_iter):
        y_new, der = op.sweep(y)
        d = sup_beta_distance(spec, y_new, y)
        history.append(d)
        y = y_new
        if ledger is not None and np.max(h_beta_norm_sq(spec.spectrum, y, spec.beta)) > ledger.R**2:
            flags.add("left_ball")
        if not math.isfinite(d):
            break
        if d <= cfg.tol:
            converged = True
            break
    if not converged:
        if ledger is not None and ledger.D < 1.0:
            raise ConvergenceError(
                f"Picard iteration did not reach tol={cfg.tol} in {cfg.max_iter} steps although D={ledger.D:.4g} < 1"
            )
        flags.add("not_converged")
    if ledger is None:
        flags.add("unchecked_feasibility")
    elif ledger.D >= 1.0:
        flags.add("infeasible")
    return _wrap(grid, y, der, n, _seed(wiener), history=tuple(history), converged=converged, flags=tuple(sorted(flags)))


def residual_check(sol: PathSolution, spec: ProblemSpec, wiener: WienerPath | None, grid: TimeGrid) -> float:
    """``max_nodes ||phi_n(sol) - sol||_beta``, the fixed-point defect."""
    again = apply_phi(sol.galerkin_n, spec, wiener, grid, sol)
    return sup_beta_distance(spec, again.states, sol.states)


def fg_project(sol: PathSolution, n: int) -> PathSolution:
    """The F-G approximation ``P^n y_n`` nodewise."""
    states = project(sol.states, n)
    der = np.where(np.isnan(sol.derivatives), np.nan, project(np.nan_to_num(sol.derivatives), n))
    return replace(sol, states=states, derivatives=der)


def write_csv(sol: PathSolution, fh: TextIO, alpha: float) -> None:
    """Header metadata lines (``#``), then ``time, mode_0..`` with ``%.17g`` values."""
    modes = sol.states.shape[1]
    fh.write(f"# alpha={alpha:.17g}\n")
    fh.write(f"# n={sol.galerkin_n}\n")
    fh.write(f"# seed={sol.sample_seed}\n")
    fh.write(f"# grid {sol.grid.describe()}\n")
    fh.write(",".join(["time"] + [f"mode_{j}" for j in range(modes)]) + "\n")
    for t, row in zip(sol.grid.nodes, sol.states):
        fh.write(",".join(f"{v:.17g}" for v in (t, *row)) + "\n")


def solution_csv(sol: PathSolution, alpha: float) -> str:
    buf = io.StringIO()
    write_csv(sol, buf, alpha)
    return buf.getvalue()
