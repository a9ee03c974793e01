"""Monte-Carlo experiments for the Galerkin convergence statements.

Every sample ``i`` uses the Wiener path seeded by ``derive_seed(seed, i)``;
all resolutions of one sample share that path (coupled comparison).
Aggregation runs in sample order, so results do not depend on scheduling.
"""

from __future__ import annotations

import io
import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence, TextIO

import numpy as np

from .exceptions import InsufficientDataError, ParameterError
from .noise import derive_seed, sample_wiener
from .problem import ConstantsLedger, ProblemSpec, feasibility_check
from .solver import PathSolution, PicardConfig, TimeGrid, fg_project, solve
from .spectral import h_beta_norm_sq

__all__ = [
    "Estimate",
    "ConvergenceReport",
    "coupled_solutions",
    "pairwise_error",
    "theoretical_bound",
    "coefficient_convergence",
    "convergence_study",
    "decay_slope",
    "mprime_check",
    "report_svg",
]


@dataclass(frozen=True)
class Estimate:
    """Sample mean, its standard error and the per-sample values."""

    mean: float
    stderr: float
    values: np.ndarray = field(repr=False)
    seeds: tuple[int, ...] = field(repr=False, default=())

    @classmethod
    def of(cls, values, seeds=()) -> "Estimate":
        v = np.asarray(values, dtype=float)
        err = float(v.std(ddof=1) / math.sqrt(v.size)) if v.size > 1 else 0.0
        return cls(float(v.mean()), err, v, tuple(seeds))


def coupled_solutions(
    n_values: Iterable[int],
    spec: ProblemSpec,
    grid: TimeGrid,
    samples: int,
    seed: int,
    cfg: PicardConfig = PicardConfig(),
    ledger: ConstantsLedger | None = None,
):
    """Yield ``(sample_seed, {n: PathSolution})`` with one Wiener path per sample."""
    ns = sorted(set(int(n) for n in n_values))
    if samples < 1:
        raise ParameterError("samples must be >= 1")
    for i in range(samples):
        s = derive_seed(seed, i)
        path = sample_wiener(spec.cov, grid.nodes, s)
        yield s, {n: solve(n, spec, path, grid, cfg, ledger) for n in ns}


def _sup_beta_sq(spec: ProblemSpec, diff: np.ndarray) -> float:
    return float(np.max(h_beta_norm_sq(spec.spectrum, diff, spec.beta)))


def pairwise_error(
    n: int,
    m: int,
    spec: ProblemSpec,
    grid: TimeGrid,
    samples: int,
    seed: int,
    cfg: PicardConfig = PicardConfig(),
) -> Estimate:
    """``E sup_nodes ||y_n - y_m||_beta^2`` over coupled samples."""
    if not 0 <= m <= n <= spec.modes:
        raise ParameterError("need 0 <= m <= n <= modes")
    vals, seeds = [], []
    for s, sols in coupled_solutions((n, m), spec, grid, samples, seed, cfg):
        vals.append(_sup_beta_sq(spec, sols[n].states - sols[m].states))
        seeds.append(s)
    return Estimate.of(vals, seeds)


def theoretical_bound(m: int, ledger: ConstantsLedger, spec: ProblemSpec) -> float:
    """``max{2M'Q_0/(1-2Q_0), 2D_h1 M'/(1-2D_h1), 2M'Q_k/(1-2Q_k)} * lambda_m^{-2(eta-beta)}``.

    Returns ``inf`` when any denominator is non-positive; 0 when ``M' = 0``.
    """
    if not 0 <= m < spec.modes:
        raise ParameterError("m must index a mode")
    if ledger.M_prime == 0.0:
        return 0.0
    factors = []
    for c in tuple(ledger.Q) + tuple(ledger.D_h1):
        if 2.0 * c >= 1.0:
            return math.inf
        factors.append(2.0 * ledger.M_prime * c / (1.0 - 2.0 * c))
    decay = spec.spectrum.lambdas[m] ** (-2.0 * (spec.eta - spec.beta))
    return max(factors) * decay


def coefficient_convergence(
    n: int,
    n_ref: int,
    spec: ProblemSpec,
    grid: TimeGrid,
    samples: int,
    seed: int,
    cfg: PicardConfig = PicardConfig(),
) -> Estimate:
    """``sup_nodes sum_{j<n} lambda_j^{2 beta} E|eta^n_j - eta^ref_j|^2`` with F-G coefficients.

    The estimate's ``values`` hold the per-node expectation profile; its
    ``stderr`` is that of the maximising node.
    """
    if not 0 <= n <= n_ref <= spec.modes:
        raise ParameterError("need 0 <= n <= n_ref <= modes")
    lam = spec.spectrum.lambdas[:n] ** (2.0 * spec.beta)
    per = []
    seeds = []
    for s, sols in coupled_solutions((n, n_ref), spec, grid, samples, seed, cfg):
        a = fg_project(sols[n], n).states[:, :n]
        b = fg_project(sols[n_ref], n_ref).states[:, :n]
        per.append(np.sum(lam * (a - b) ** 2, axis=1))
        seeds.append(s)
    per = np.array(per)
    profile = per.mean(axis=0)
    i = int(np.argmax(profile))
    err = float(per[:, i].std(ddof=1) / math.sqrt(samples)) if samples > 1 else 0.0
    return Estimate(float(profile[i]), err, profile, tuple(seeds))


@dataclass(frozen=True)
class ConvergenceReport:
    m_values: tuple[int, ...]
    n_values: tuple[int, ...]
    lambda_m: tuple[float, ...]
    errors: tuple[float, ...]
    stderr: tuple[float, ...]
    bounds: tuple[float, ...]
    feasible: tuple[bool, ...]
    mc_samples: int
    seed: int
    grid: str

    def write_csv(self, fh: TextIO) -> None:
        fh.write(f"# mc_samples={self.mc_samples}\n# seed={self.seed}\n# grid {self.grid}\n")
        fh.write("m,n,lambda_m,error,stderr,bound,feasible\n")
        for row in zip(self.m_values, self.n_values, self.lambda_m, self.errors, self.stderr, self.bounds, self.feasible):
            m, n, lam, e, se, b, f = row
            fh.write(f"{m},{n},{lam:.17g},{e:.17g},{se:.17g},{b:.17g},{int(f)}\n")

    def csv(self) -> str:
        buf = io.StringIO()
        self.write_csv(buf)
        return buf.getvalue()


def convergence_study(
    m_values: Sequence[int],
    spec: ProblemSpec,
    grid: TimeGrid,
    samples: int,
    seed: int,
    ledger: ConstantsLedger,
    ratio: int = 2,
    cfg: PicardConfig = PicardConfig(),
) -> ConvergenceReport:
    """``pairwise_error(ratio*m, m)`` for every ``m`` from one shared set of coupled solves."""
    ms = tuple(int(m) for m in m_values)
    ns = tuple(ratio * m for m in ms)
    if max(ns) > spec.modes:
        raise ParameterError("ratio * max(m) exceeds the spectrum size")
    vals = {m: [] for m in ms}
    for _, sols in coupled_solutions(set(ms) | set(ns), spec, grid, samples, seed, cfg):
        for m, n in zip(ms, ns):
            vals[m].append(_sup_beta_sq(spec, sols[n].states - sols[m].states))
    ests = [Estimate.of(vals[m]) for m in ms]
    bounds = tuple(theoretical_bound(m, ledger, spec) for m in ms)
    feas = feasibility_check(ledger).feasible
    return ConvergenceReport(
        m_values=ms,
        n_values=ns,
        lambda_m=tuple(float(spec.spectrum.lambdas[m]) for m in ms),
        errors=tuple(e.mean for e in ests),
        stderr=tuple(e.stderr for e in ests),
        bounds=bounds,
        feasible=tuple(feas and math.isfinite(b) for b in bounds),
        mc_samples=samples,
        seed=seed,
        grid=grid.describe(),
    )


def decay_slope(report: ConvergenceReport) -> float:
    """Least-squares slope of ``log(error)`` against ``log(lambda_m)``.

    A slope ``>= 0`` means no decay was observed.
    """
    lam = np.asarray(report.lambda_m, dtype=float)
    err = np.asarray(report.errors, dtype=float)
    keep = err > 0
    if keep.sum() < 3:
        raise InsufficientDataError("decay_slope needs at least 3 positive errors")
    slope, _ = np.polyfit(np.log(lam[keep]), np.log(err[keep]), 1)
    return float(slope)


def mprime_check(
    n: int,
    spec: ProblemSpec,
    grid: TimeGrid,
    samples: int,
    seed: int,
    ledger: ConstantsLedger,
    cfg: PicardConfig = PicardConfig(),
) -> Estimate:
    """Per-sample ``sup_nodes ||A^eta y_n||^2``; compare against ``ledger.M_prime``."""
    vals, seeds = [], []
    for s, sols in coupled_solutions((n,), spec, grid, samples, seed, cfg):
        sol: PathSolution = sols[n]
        vals.append(float(np.max(h_beta_norm_sq(spec.spectrum, sol.states, spec.eta))))
        seeds.append(s)
    return Estimate.of(vals, seeds)


def report_svg(report: ConvergenceReport, slope: float | None = None) -> str:
    """Log-log plot of errors (points) and finite bounds (crosses), with a reference slope line."""
    W, H, pad = 480, 360, 50
    lam = np.log10(np.asarray(report.lambda_m))
    err = np.asarray(report.errors)
    bnd = np.asarray(report.bounds)
    ys = [np.log10(err[err > 0])]
    fin = np.isfinite(bnd) & (bnd > 0)
    if fin.any():
        ys.append(np.log10(bnd[fin]))
    yall = np.concatenate(ys) if ys and sum(y.size for y in ys) else np.array([0.0, 1.0])
    x0, x1 = lam.min() - 0.1, lam.max() + 0.1
    y0, y1 = yall.min() - 0.5, yall.max() + 0.5

    def px(x):
        return pad + (x - x0) / (x1 - x0) * (W - 2 * pad)

    def py(y):
        return H - pad - (y - y0) / (y1 - y0) * (H - 2 * pad)

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}">',
        f'<rect x="0" y="0" width="{W}" height="{H}" fill="white"/>',
        f'<line x1="{pad}" y1="{H - pad}" x2="{W - pad}" y2="{H - pad}" stroke="black"/>',
        f'<line x1="{pad}" y1="{pad}" x2="{pad}" y2="{H - pad}" stroke="black"/>',
        f'<text x="{W / 2:.1f}" y="{H - 12}" text-anchor="middle" font-size="12">log10 lambda_m</text>',
        f'<text x="14" y="{H / 2:.1f}" font-size="12" transform="rotate(-90 14 {H / 2:.1f})">log10 error</text>',
    ]
    for x, e in zip(lam, err):
        if e > 0:
            out.append(f'<circle cx="{px(x):.2f}" cy="{py(np.log10(e)):.2f}" r="4" fill="steelblue"/>')
    for x, b in zip(lam, bnd):
        if np.isfinite(b) and b > 0:
            cx, cy = px(x), py(np.log10(b))
            out.append(
                f'<path d="M{cx - 4:.2f},{cy - 4:.2f}L{cx + 4:.2f},{cy + 4:.2f}M{cx - 4:.2f},{cy + 4:.2f}L{cx + 4:.2f},{cy - 4:.2f}" stroke="firebrick"/>'
            )
    if slope is not None and (err > 0).any():
        i = int(np.flatnonzero(err > 0)[0])
        ya = np.log10(err[i])
        yb = ya + slope * (lam[-1] - lam[i])
        out.append(
            f'<line x1="{px(lam[i]):.2f}" y1="{py(ya):.2f}" x2="{px(lam[-1]):.2f}" y2="{py(yb):.2f}" stroke="gray" stroke-dasharray="4,3"/>'
        )
    out.append("</svg>")
    return "\n".join(out) + "\n"
