"""Problem instances, assumption constants and the a-priori constants ledger.

Nonlinearities are vectorised over time nodes:

* ``K(s, Y)`` and ``N(s, Y)`` take times ``s`` of shape ``(nodes,)`` and
  coefficients ``Y`` of shape ``(nodes, modes)`` and return ``(nodes, modes)``.
  ``N`` returns noise coefficients acting diagonally on the noise modes.
* ``h1[k-1](s, x)`` and ``h2[k-1](s, x)`` take times ``(nodes,)`` and one
  left-limit state ``x`` of shape ``(modes,)``.
* ``a(t)`` is the scalar memory kernel, vectorised over ``t``.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy import fft
from scipy.integrate import simpson

from .exceptions import ConfigurationError, ParameterError, ShapeError
from .families import FamilyParams, estimate_bounds
from .noise import CovarianceSpec
from .spectral import Spectrum, h_beta_norm_sq

__all__ = [
    "ImpulseSchedule",
    "NonlinearitySpec",
    "ProblemSpec",
    "ConstantsLedger",
    "FeasibilityReport",
    "PseudoSpectral",
    "holder_norms",
    "compute_constants",
    "feasibility_check",
    "build_heat_example",
    "build_scalar_example",
]

Field = Callable[[np.ndarray, np.ndarray], np.ndarray]
ImpulseMap = Callable[[np.ndarray, np.ndarray], np.ndarray]


@dataclass(frozen=True)
class ImpulseSchedule:
    """Impulse onsets ``s_k`` and ends ``sigma_k`` with ``0 < s_1 < sigma_1 < ... < sigma_q < T``."""

    s_points: tuple[float, ...]
    sigma_points: tuple[float, ...]
    horizon: float

    def __post_init__(self):
        s = tuple(float(v) for v in self.s_points)
        g = tuple(float(v) for v in self.sigma_points)
        T = float(self.horizon)
        if len(s) != len(g):
            raise ParameterError("s_points and sigma_points must have equal length")
        chain = [0.0] + [v for pair in zip(s, g) for v in pair] + [T]
        if any(b <= a for a, b in zip(chain, chain[1:])):
            raise ParameterError("need 0 < s_1 < sigma_1 < ... < sigma_q < T")
        object.__setattr__(self, "s_points", s)
        object.__setattr__(self, "sigma_points", g)
        object.__setattr__(self, "horizon", T)

    @property
    def q(self) -> int:
        return len(self.s_points)

    def s_next(self, k: int) -> float:
        """``s_{k+1}`` for ``k = 0..q`` with ``s_{q+1} = T``."""
        return self.s_points[k] if k < self.q else self.horizon

    def evolution_intervals(self) -> list[tuple[float, float]]:
        """``(sigma_k, s_{k+1}]`` for ``k = 0..q`` with ``sigma_0 = 0``."""
        starts = (0.0,) + self.sigma_points
        return [(starts[k], self.s_next(k)) for k in range(self.q + 1)]

    def impulse_intervals(self) -> list[tuple[float, float]]:
        return list(zip(self.s_points, self.sigma_points))


@dataclass(frozen=True, eq=False)
class NonlinearitySpec:
    """Maps ``K, N, a, h^1_k, h^2_k`` and their declared assumption constants.

    ``L_N`` and ``L_N_prime`` are functions of time; ``holder_p`` is the
    exponent paired with ``||a^2||_{L^p}`` (its conjugate applies to ``L_N``).
    """

    K: Field
    N: Field
    a: Callable[[np.ndarray], np.ndarray]
    h1: tuple[ImpulseMap, ...] = ()
    h2: tuple[ImpulseMap, ...] = ()
    L_K: float = 0.0
    L_K_prime: float = 0.0
    L_N: Callable[[np.ndarray], np.ndarray] = field(default=lambda s: np.zeros_like(s))
    L_N_prime: Callable[[np.ndarray], np.ndarray] = field(default=lambda s: np.zeros_like(s))
    D_h1: tuple[float, ...] = ()
    D_h2: tuple[float, ...] = ()
    C_h1: tuple[float, ...] = ()
    C_h2: tuple[float, ...] = ()
    holder_p: float = 2.0

    def __post_init__(self):
        for name in ("h1", "h2", "D_h1", "D_h2", "C_h1", "C_h2"):
            object.__setattr__(self, name, tuple(getattr(self, name)))
        counts = {len(self.h1), len(self.h2), len(self.D_h1), len(self.D_h2), len(self.C_h1), len(self.C_h2)}
        if len(counts) != 1:
            raise ParameterError("impulse maps and their constants must all have length q")
        scalars = (self.L_K, self.L_K_prime) + self.D_h1 + self.D_h2 + self.C_h1 + self.C_h2
        if any(not math.isfinite(c) or c < 0 for c in scalars):
            raise ParameterError("declared constants must be finite and non-negative")
        if not self.holder_p > 1.0:
            raise ParameterError("holder_p must exceed 1")

    @property
    def q(self) -> int:
        return len(self.h1)

    @property
    def holder_q(self) -> float:
        return self.holder_p / (self.holder_p - 1.0)


@dataclass(frozen=True, eq=False)
class ProblemSpec:
    spectrum: Spectrum
    alpha: float
    beta: float
    eta: float
    schedule: ImpulseSchedule
    nonlin: NonlinearitySpec
    cov: CovarianceSpec
    y0: np.ndarray
    z0: np.ndarray
    name: str = "custom"

    def __post_init__(self):
        if not 1.0 < self.alpha <= 2.0:
            raise ParameterError("alpha must lie in (1, 2]")
        if not 0.0 < self.beta < self.eta < 1.0:
            raise ParameterError("need 0 < beta < eta < 1")
        if self.nonlin.q != self.schedule.q:
            raise ParameterError("impulse map count must equal the number of impulses")
        if self.cov.modes != self.spectrum.modes:
            raise ShapeError("covariance and spectrum must have the same number of modes")
        for name in ("y0", "z0"):
            v = np.array(self.spectrum._check(getattr(self, name)), dtype=float)
            if not np.all(np.isfinite(v)):
                raise ParameterError(f"{name} must be finite")
            v.setflags(write=False)
            object.__setattr__(self, name, v)

    @property
    def modes(self) -> int:
        return self.spectrum.modes

    @property
    def families(self) -> FamilyParams:
        return FamilyParams(self.alpha, self.spectrum)


@dataclass(frozen=True)
class ConstantsLedger:
    """The a-priori constants with the inputs they were assembled from."""

    rho: float
    M: float
    N: tuple[float, ...]
    Q: tuple[float, ...]
    M_k: tuple[float, ...]
    D: float
    R: float
    M_prime: float
    norm_A_beta_m1: float
    norm_A_eta_m1: float
    trace_Q: float
    a2_Lp: float
    L_N_Lq: float
    L_N_prime_Lq: float
    horizon: float
    s_next: tuple[float, ...]
    D_h1: tuple[float, ...]
    C_h1: tuple[float, ...]

    def as_dict(self) -> dict:
        return asdict(self)

    def rows(self) -> list[tuple[str, float]]:
        """Flat ``(name, value)`` pairs for CSV output."""
        out = [("rho", self.rho), ("M", self.M)]
        out += [(f"N_{k}", v) for k, v in enumerate(self.N)]
        out += [(f"Q_{k}", v) for k, v in enumerate(self.Q)]
        out += [(f"M_{k}", v) for k, v in enumerate(self.M_k)]
        out += [(f"D_h1_{k + 1}", v) for k, v in enumerate(self.D_h1)]
        out += [(f"C_h1_{k + 1}", v) for k, v in enumerate(self.C_h1)]
        out += [
            ("D", self.D),
            ("R", self.R),
            ("M_prime", self.M_prime),
            ("norm_A_beta_m1", self.norm_A_beta_m1),
            ("norm_A_eta_m1", self.norm_A_eta_m1),
            ("trace_Q", self.trace_Q),
            ("a2_Lp", self.a2_Lp),
            ("L_N_Lq", self.L_N_Lq),
            ("L_N_prime_Lq", self.L_N_prime_Lq),
        ]
        return out


@dataclass(frozen=True)
class FeasibilityReport:
    D: float
    contraction: bool
    twoQ: tuple[float, ...]
    convergence: tuple[bool, ...]
    twoD_h1: tuple[float, ...]
    R: float

    @property
    def feasible(self) -> bool:
        return self.contraction and all(self.convergence)

    def as_dict(self) -> dict:
        d = asdict(self)
        d["feasible"] = self.feasible
        return d


class PseudoSpectral:
    """Collocation on ``P = 2 * modes`` interior points ``xi_i = i / (P + 1)``.

    Synthesis evaluates ``sum_j c_j sqrt(2) sin((j+1) pi xi)``; analysis is the
    discrete sine transform truncated to ``modes``. Analysis inverts synthesis
    exactly on band-limited fields.
    """

    def __init__(self, modes: int, points: int | None = None):
        if modes < 1:
            raise ParameterError("modes must be >= 1")
        self.modes = modes
        self.points = 2 * modes if points is None else int(points)
        if self.points < modes:
            raise ParameterError("need at least as many points as modes")
        self.xi = np.arange(1, self.points + 1) / (self.points + 1)

    def synthesize(self, coeffs: np.ndarray) -> np.ndarray:
        c = np.asarray(coeffs, dtype=float)
        pad = np.zeros(c.shape[:-1] + (self.points,))
        pad[..., : self.modes] = c
        return fft.dst(pad, type=1, axis=-1) / math.sqrt(2.0)

    def analyze(self, values: np.ndarray) -> np.ndarray:
        v = np.asarray(values, dtype=float)
        out = fft.dst(v, type=1, axis=-1) / (math.sqrt(2.0) * (self.points + 1))
        return out[..., : self.modes]

    def compose(self, fn: Callable[[np.ndarray], np.ndarray], coeffs: np.ndarray) -> np.ndarray:
        """Coefficients of the pointwise composition ``fn(field)``."""
        return self.analyze(fn(self.synthesize(coeffs)))


def holder_norms(nl: NonlinearitySpec, horizon: float, points: int = 2001) -> tuple[float, float, float]:
    """``(||a^2||_{L^p}, ||L_N||_{L^q}, ||L_N'||_{L^q})`` on ``[0, T]`` by composite Simpson."""
    if points % 2 == 0:
        points += 1
    t = np.linspace(0.0, horizon, points)
    p, q = nl.holder_p, nl.holder_q

    def norm(values, e):
        values = np.broadcast_to(np.asarray(values, dtype=float), t.shape)
        if not np.all(np.isfinite(values)):
            raise ConfigurationError("non-finite integrand in Hoelder norm")
        val = simpson(np.abs(values) ** e, x=t) ** (1.0 / e)
        if not math.isfinite(val):
            raise ConfigurationError("non-finite Hoelder norm")
        return float(val)

    a = np.asarray(nl.a(t), dtype=float)
    return norm(a**2, p), norm(nl.L_N(t), q), norm(nl.L_N_prime(t), q)


def compute_constants(
    spec: ProblemSpec,
    bound_grid: int = 256,
    M: float | None = None,
    rho: float | None = None,
) -> ConstantsLedger:
    """Assemble ``rho, M, N_k, Q_k, D, R, M'`` from the declared constants.

    ``M`` and ``rho`` come from :func:`estimate_bounds` unless overridden.
    ``||A^{beta-1}||`` and ``||A^{eta-1}||`` are attained at the smallest
    eigenvalue.
    """
    nl, sch = spec.nonlin, spec.schedule
    T = sch.horizon
    if M is None or rho is None:
        est = estimate_bounds(spec.families, T, bound_grid)
        M = est.M if M is None else M
        rho = est.rho if rho is None else rho
    M, rho = float(M), float(rho)
    a2, lnq, lnpq = holder_norms(nl, T)
    trq = spec.cov.trace
    nb = spec.spectrum.power_norm(spec.beta - 1.0)
    ne = spec.spectrum.power_norm(spec.eta - 1.0)
    s_next = tuple(sch.s_next(k) for k in range(sch.q + 1))

    growth = nl.L_K_prime + 4.0 * trq * a2 * lnpq
    lip = nl.L_K + 4.0 * trq * lnq * a2
    y0b = h_beta_norm_sq(spec.spectrum, spec.y0, spec.beta)
    z0b = h_beta_norm_sq(spec.spectrum, spec.z0, spec.beta)
    y0e = h_beta_norm_sq(spec.spectrum, spec.y0, spec.eta)
    z0e = h_beta_norm_sq(spec.spectrum, spec.z0, spec.eta)

    N = [4.0 * (M**2 * y0b + M**2 * T**2 * z0b + nb**2 * rho**2 * s_next[0] * growth)]
    Q = [2.0 * (nb**2 * rho**2 * s_next[0] * lip)]
    Mk = [4.0 * (M**2 * y0e + M**2 * T**2 * z0e + ne**2 * rho**2 * s_next[0] * growth)]
    for k in range(1, sch.q + 1):
        c1, c2 = nl.C_h1[k - 1], nl.C_h2[k - 1]
        d1, d2 = nl.D_h1[k - 1], nl.D_h2[k - 1]
        N.append(4.0 * (M**2 * c1 + M**2 * T**2 * c2 + nb**2 * rho**2 * s_next[k] * growth))
        Q.append(4.0 * (M**2 * d1 + M**2 * T**2 * d2 + nb**2 * rho**2 * s_next[k] * lip))
        Mk.append(4.0 * (M**2 * c1 + M**2 * T**2 * c2 + ne**2 * rho**2 * s_next[k] * growth))

    D = max(Q + list(nl.D_h1))
    R = math.sqrt(max(N + list(nl.C_h1)))
    M_prime = max(Mk + list(nl.C_h1))
    return ConstantsLedger(
        rho=rho,
        M=M,
        N=tuple(N),
        Q=tuple(Q),
        M_k=tuple(Mk),
        D=D,
        R=R,
        M_prime=M_prime,
        norm_A_beta_m1=nb,
        norm_A_eta_m1=ne,
        trace_Q=trq,
        a2_Lp=a2,
        L_N_Lq=lnq,
        L_N_prime_Lq=lnpq,
        horizon=T,
        s_next=s_next,
        D_h1=nl.D_h1,
        C_h1=nl.C_h1,
    )


def feasibility_check(ledger: ConstantsLedger) -> FeasibilityReport:
    """``D < 1`` for existence; ``2 Q_k < 1`` and ``2 D_{h^1_k} < 1`` for the convergence bounds."""
    twoQ = tuple(2.0 * q for q in ledger.Q)
    twoD = tuple(2.0 * d for d in ledger.D_h1)
    return FeasibilityReport(
        D=ledger.D,
        contraction=ledger.D < 1.0,
        twoQ=twoQ,
        convergence=tuple(v < 1.0 for v in twoQ + twoD),
        twoD_h1=twoD,
        R=ledger.R,
    )


def _exp_kernel(t):
    return np.exp(-np.asarray(t, dtype=float))


def build_heat_example(
    modes: int,
    schedule: ImpulseSchedule,
    kernel: Callable[[np.ndarray], np.ndarray] = _exp_kernel,
    *,
    alpha: float = 1.5,
    beta: float = 0.5,
    eta: float = 0.75,
    y0: Sequence[float] | None = None,
    z0: Sequence[float] | None = None,
    q_eigs: Sequence[float] | None = None,
    radius: float = 1.0,
) -> ProblemSpec:
    """The Dirichlet heat-type example on (0, 1).

    ``K(s, y) = s / (10 (1 + s)) y``; ``N`` and the impulse maps act on the
    field pointwise through :class:`PseudoSpectral`. The noise covariance
    defaults to ``q_j = 1/(j+1)^2`` (the identity is not trace class).
    ``radius`` bounds ``E||A^beta y||^2`` in the growth constant ``L_K'``.
    """
    sp = Spectrum.dirichlet_laplacian(modes)
    ps = PseudoSpectral(modes)
    q = schedule.q
    norm_m = sp.power_norm(-beta) ** 2

    def K(s, Y):
        s = np.asarray(s, dtype=float)
        return (s / (10.0 * (1.0 + s)))[:, None] * Y

    def N(s, Y):
        s = np.asarray(s, dtype=float)
        u = np.abs(ps.synthesize(Y))
        return ps.analyze(np.exp(-s)[:, None] * u / (3.0 * (1.0 + u)))

    def make_h(k, which):
        def h(s, x):
            s = np.asarray(s, dtype=float)
            u = ps.synthesize(x)[None, :] + k * s[:, None]
            val = np.sin(u) / (2 * k + 1) if which == 1 else k * np.cos(u) / (2 * k + 1)
            return ps.analyze(val)

        return h

    ks = range(1, q + 1)
    nl = NonlinearitySpec(
        K=K,
        N=N,
        a=kernel,
        h1=tuple(make_h(k, 1) for k in ks),
        h2=tuple(make_h(k, 2) for k in ks),
        L_K=norm_m / 100.0,
        L_K_prime=norm_m / 100.0 * radius**2,
        L_N=lambda s: np.exp(-2.0 * np.asarray(s, dtype=float)) / 9.0 * norm_m,
        L_N_prime=lambda s: np.exp(-2.0 * np.asarray(s, dtype=float)) / 9.0,
        D_h1=tuple(1.0 / (2 * k + 1) ** 2 for k in ks),
        D_h2=tuple((k / (2 * k + 1)) ** 2 for k in ks),
        C_h1=tuple(1.0 / (2 * k + 1) ** 2 for k in ks),
        C_h2=tuple((k / (2 * k + 1)) ** 2 for k in ks),
        holder_p=2.0,
    )
    if y0 is None:
        y0 = np.zeros(modes)
        y0[0] = 0.5
    if z0 is None:
        z0 = np.zeros(modes)
    if q_eigs is None:
        q_eigs = 1.0 / np.arange(1, modes + 1) ** 2
    return ProblemSpec(
        spectrum=sp,
        alpha=alpha,
        beta=beta,
        eta=eta,
        schedule=schedule,
        nonlin=nl,
        cov=CovarianceSpec(np.asarray(q_eigs, dtype=float)),
        y0=np.asarray(y0, dtype=float),
        z0=np.asarray(z0, dtype=float),
        name="heat6",
    )


def build_scalar_example(
    a1: float,
    a2: float,
    a3: float,
    g: Callable[[np.ndarray, np.ndarray], np.ndarray],
    r: Callable[[np.ndarray], np.ndarray],
    schedule: ImpulseSchedule,
    *,
    r_prime: Callable[[np.ndarray], np.ndarray] | None = None,
    kernel: Callable[[np.ndarray], np.ndarray] | None = None,
    x0: float = 1.0,
    v0: float = 0.0,
    g_lipschitz: float = 0.0,
    g_bound: float = 0.0,
    beta: float = 0.25,
    eta: float = 0.75,
) -> ProblemSpec:
    """The scalar control system ``y'' + a1 y + a2 sin s = int a(s-r) e^{-(s-r)} g dW``.

    ``A`` has the single eigenvalue ``a1`` and ``alpha = 2``, so the families
    are ``cos(sqrt(a1) s)`` and ``sin(sqrt(a1) s) / sqrt(a1)``. The control
    enters ``K`` as the y-independent summand ``-a2 sin s``. The effective
    noise kernel is ``a(t) e^{-t}`` (``a = 1`` by default). ``g`` is scalar
    and vectorised: ``g(s, y)`` with ``y`` of shape ``(nodes,)``.
    ``g_lipschitz`` and ``g_bound`` are the declared Lipschitz and sup bounds
    of ``g`` in ``y``; impulse constants use sups of ``r`` and ``r'`` over
    each impulse interval (sampled).
    """
    if not a1 > 0:
        raise ParameterError("a1 must be positive")
    if r_prime is None:
        r_prime = lambda s: np.zeros_like(np.asarray(s, dtype=float))  # noqa: E731
    base = kernel if kernel is not None else (lambda t: np.ones_like(np.asarray(t, dtype=float)))
    sp = Spectrum(np.array([float(a1)]))
    lam_b = a1 ** (2.0 * beta)

    def K(s, Y):
        s = np.asarray(s, dtype=float)
        return np.broadcast_to((-a2 * np.sin(s))[:, None], Y.shape).copy()

    def N(s, Y):
        return np.asarray(g(np.asarray(s, dtype=float), Y[:, 0]), dtype=float).reshape(-1, 1) * np.ones_like(Y)

    def make_h(fn):
        def h(s, x):
            s = np.asarray(s, dtype=float)
            return (a3 * math.tanh(float(x[0])) * fn(s)).reshape(-1, 1)

        return h

    def sup_sq(fn, lo, hi):
        t = np.linspace(lo, hi, 513)
        return float(np.max(np.asarray(fn(t), dtype=float) ** 2))

    imp = schedule.impulse_intervals()
    r2 = [sup_sq(r, lo, hi) for lo, hi in imp]
    rp2 = [sup_sq(r_prime, lo, hi) for lo, hi in imp]
    nl = NonlinearitySpec(
        K=K,
        N=N,
        a=lambda t: base(t) * np.exp(-np.asarray(t, dtype=float)),
        h1=tuple(make_h(r) for _ in imp),
        h2=tuple(make_h(r_prime) for _ in imp),
        L_K=0.0,
        L_K_prime=float(a2) ** 2,
        L_N=lambda s: np.full_like(np.asarray(s, dtype=float), g_lipschitz**2 / lam_b),
        L_N_prime=lambda s: np.full_like(np.asarray(s, dtype=float), g_bound**2),
        D_h1=tuple(a3**2 * v for v in r2),
        D_h2=tuple(a3**2 * v for v in rp2),
        C_h1=tuple(lam_b * a3**2 * v for v in r2),
        C_h2=tuple(lam_b * a3**2 * v for v in rp2),
    )
    return ProblemSpec(
        spectrum=sp,
        alpha=2.0,
        beta=beta,
        eta=eta,
        schedule=schedule,
        nonlin=nl,
        cov=CovarianceSpec(np.array([1.0])),
        y0=np.array([float(x0)]),
        z0=np.array([float(v0)]),
        name="scalar6",
    )
