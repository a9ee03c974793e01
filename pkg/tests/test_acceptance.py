"""Acceptance criteria 1 to 10, one test per criterion.

Each test records a PASS/FAIL line (printed in the pytest terminal summary)
before asserting, so the verdict is visible even when the assertion fails.
"""

import math

import numpy as np
from scipy.integrate import cumulative_simpson

from test_problem import GOLDEN, frac, golden_spec

from fsgalerkin.cli import main
from fsgalerkin.families import FamilyParams, cosine_factors, rl_factors, sine_factors
from fsgalerkin.fractional_calculus import SampledFunction, caputo_derivative, mittag_leffler, rl_integral_nodes
from fsgalerkin.harness import convergence_study, decay_slope
from fsgalerkin.noise import CovarianceSpec, derive_seed, ito_integral, lemma21_check, sample_ensemble, sample_wiener
from fsgalerkin.problem import (
    ImpulseSchedule,
    NonlinearitySpec,
    ProblemSpec,
    build_heat_example,
    build_scalar_example,
    compute_constants,
    feasibility_check,
)
from fsgalerkin.solver import PicardConfig, TimeGrid, solve
from fsgalerkin.spectral import Spectrum

PI2 = math.pi**2
# short-horizon heat configuration with D < 1
FEASIBLE = ImpulseSchedule([0.05], [0.08], 0.2)


def test_criterion_01_mittag_leffler_identities(criterion):
    z = np.linspace(-50.0, 5.0, 500)
    e_exp = float(np.max(np.abs(mittag_leffler(z, 1.0, 1.0) - np.exp(z)) / np.maximum(1.0, np.exp(z))))
    x = np.linspace(0.0, 50.0, 500)
    e_cos = float(np.max(np.abs(mittag_leffler(-(x**2), 2.0, 1.0) - np.cos(x))))
    e_rec = 0.0
    zz = np.linspace(-100.0, 0.0, 201)
    for a in (1.2, 1.5, 1.9):
        for b in (1.0, 2.0, a):
            lhs = mittag_leffler(zz, a, b)
            rhs = zz * mittag_leffler(zz, a, a + b) + 1.0 / math.gamma(b)
            e_rec = max(e_rec, float(np.max(np.abs(lhs - rhs))))
    ok = e_exp <= 1e-10 and e_cos <= 1e-9 and e_rec <= 1e-9
    criterion(1, ok, f"exp {e_exp:.1e} (1e-10), cos {e_cos:.1e} (1e-9), recurrence {e_rec:.1e} (1e-9)", budget=5)
    assert ok


def _volterra_residual(fp: FamilyParams, N: int = 2048) -> float:
    """``max |C - 1 + lambda J^alpha C|`` on a graded mesh, J^alpha Richardson-extrapolated."""
    t = (np.arange(N + 1) / N) ** 2
    C = cosine_factors(fp, t)
    worst = 0.0
    for j, lam in enumerate(fp.spectrum.lambdas):
        fine = rl_integral_nodes(SampledFunction(t, C[:, j]), fp.alpha).values[::2]
        coarse = rl_integral_nodes(SampledFunction(t[::2], C[::2, j]), fp.alpha).values
        J = (4.0 * fine - coarse) / 3.0
        worst = max(worst, float(np.max(np.abs(C[::2, j] - 1.0 + lam * J))))
    return worst


def test_criterion_02_operator_families(criterion):
    sp = Spectrum.dirichlet_laplacian(8)
    t = np.linspace(0.0, 1.0, 2048)
    e_int = e_vol = 0.0
    for a in (1.2, 1.5, 1.8, 2.0):
        fp = FamilyParams(a, sp)
        C, S = cosine_factors(fp, t), sine_factors(fp, t)
        e_int = max(e_int, float(np.max(np.abs(cumulative_simpson(C, x=t, axis=0, initial=0) - S))))
        e_vol = max(e_vol, _volterra_residual(fp, 1024))
    fp2 = FamilyParams(2.0, sp)
    w = np.sqrt(sp.lambdas)
    e_two = max(
        float(np.max(np.abs(cosine_factors(fp2, t) - np.cos(np.outer(t, w))))),
        float(np.max(np.abs(sine_factors(fp2, t) - np.sin(np.outer(t, w)) / w))),
        float(np.max(np.abs(rl_factors(fp2, t) - np.sin(np.outer(t, w)) / w))),
    )
    ok = e_int <= 1e-6 and e_vol <= 1e-5 and e_two <= 1e-9
    criterion(2, ok, f"sine=int cosine {e_int:.1e} (1e-6), Volterra {e_vol:.1e} (1e-5), alpha=2 {e_two:.1e}", budget=30)
    assert ok


def _linear_feedback_spec(alpha: float, c: float):
    sp = Spectrum.dirichlet_laplacian(4)
    nl = NonlinearitySpec(K=lambda s, Y: c * Y, N=lambda s, Y: np.zeros_like(Y), a=np.ones_like)
    sch = ImpulseSchedule([], [], 1.0)
    y0 = np.array([1.0, -0.5, 0.25, 0.1])
    z0 = np.array([0.5, 0.2, -0.1, 0.0])
    return ProblemSpec(sp, alpha, 0.25, 0.75, sch, nl, CovarianceSpec(np.zeros(4)), y0, z0), sch


def test_criterion_03_deterministic_exactness(criterion):
    # K = N = h = 0: the solver output is C y0 + S z0 to rounding on any grid
    e_zero = 0.0
    ratios = {}
    for alpha in (1.5, 2.0):
        spec, sch = _linear_feedback_spec(alpha, 0.0)
        g = TimeGrid.build(sch, 16)
        sol = solve(4, spec, None, g)
        fp = spec.families
        ref = cosine_factors(fp, g.nodes) * spec.y0 + sine_factors(fp, g.nodes) * spec.z0
        e_zero = max(e_zero, float(np.max(np.abs(sol.states - ref))))
        # refinement order of the product integration, measured with K = 2 y
        c = 2.0
        spec, sch = _linear_feedback_spec(alpha, c)
        errs = []
        for steps in (16, 32, 64, 128):
            g = TimeGrid.build(sch, steps)
            sol = solve(4, spec, None, g, PicardConfig(1e-14, 300))
            mu = spec.spectrum.lambdas - c
            tt = g.nodes[:, None]
            ref = mittag_leffler(-mu * tt**alpha, alpha, 1.0) * spec.y0 + tt * mittag_leffler(-mu * tt**alpha, alpha, 2.0) * spec.z0
            errs.append(float(np.max(np.abs(sol.states - ref))))
        ratios[alpha] = [errs[i] / errs[i + 1] for i in range(3)]
    flat = [r for v in ratios.values() for r in v]
    ok = e_zero <= 1e-13 and all(3.5 <= r <= 4.5 for r in flat)
    txt = ", ".join(f"alpha={a}: " + "/".join(f"{r:.2f}" for r in v) for a, v in ratios.items())
    criterion(3, ok, f"K=0 error {e_zero:.1e}; refinement ratios {txt} (4.0 +- 0.5)", budget=60)
    assert ok


def test_criterion_04_caputo_eigen_identity(criterion):
    t = np.linspace(0.0, 1.0, 4096)
    worst = 0.0
    for lam in (1.0, PI2):
        for mu in (1.5, 1.9):
            e = mittag_leffler(-lam * t**mu, mu, 1.0)
            d = caputo_derivative(SampledFunction(t, e), mu, initial_slope=0.0, singular_exponents=(mu, 2 * mu))
            worst = max(worst, float(np.max(np.abs(d.values + lam * e))))
    ok = worst <= 1e-4
    criterion(4, ok, f"max |D^a E + lambda E| = {worst:.1e} (1e-4)", budget=30)
    assert ok


def test_criterion_05_ito_and_maximal_inequality(criterion):
    g = np.linspace(0.0, 1.0, 201)
    cov = CovarianceSpec([1.0, 0.5])
    left = g[:-1]
    integrands = {
        "constant": np.tile([1.0, 2.0], (200, 1)),
        "linear": np.stack([left, 1.0 - left], axis=1),
        "cosine": np.stack([np.cos(3 * left), np.sin(5 * left)], axis=1),
    }
    paths = sample_ensemble(cov, g, 21, 10_000)
    iso = []
    for name, z in integrands.items():
        vals = np.array([np.sum(ito_integral(p, z) ** 2) for p in paths])
        target = float(np.sum(cov.q_eigs * np.sum(z**2 * np.diff(g)[:, None], axis=0)))
        se = vals.std(ddof=1) / math.sqrt(vals.size)
        iso.append((name, abs(vals.mean() - target) / se))

    heat = build_heat_example(4, FEASIBLE, alpha=2.0, beta=0.25, eta=0.75)
    grid = TimeGrid.build(FEASIBLE, 16)

    def heat_integrand(path):
        sol = solve(4, heat, path, grid)
        return heat.nonlin.N(grid.nodes[:-1], sol.states[:-1])

    lem = {
        "constant": lemma21_check(cov, g, integrands["constant"], 2000, seed=1),
        "linear": lemma21_check(cov, g, integrands["linear"], 2000, seed=2),
        "heat-path": lemma21_check(heat.cov, grid.nodes, heat_integrand, 1000, seed=3),
    }
    iso_ok = all(k <= 3.0 for _, k in iso)
    lem_ok = all(r.lhs <= r.rhs + 3 * r.lhs_stderr for r in lem.values())
    ok = iso_ok and lem_ok
    detail = "isometry " + ", ".join(f"{n} {k:.2f}se" for n, k in iso)
    detail += "; maximal " + ", ".join(f"{n} {r.lhs:.3g}<={r.rhs:.3g}" for n, r in lem.items())
    criterion(5, ok, detail, budget=120)
    assert ok


def test_criterion_06_contraction(criterion):
    spec = build_heat_example(4, FEASIBLE, alpha=2.0, beta=0.25, eta=0.75)
    led = compute_constants(spec)
    grid = TimeGrid.build(FEASIBLE, 32)
    cap = math.sqrt(led.D) + 0.1 if led.D < 1 else -1.0
    worst, counted = 0.0, 0
    for i in range(20):
        path = sample_wiener(spec.cov, grid.nodes, derive_seed(6, i))
        sol = solve(4, spec, path, grid, PicardConfig(1e-13, 100), ledger=led)
        h = np.array(sol.history)
        r = h[2:] / h[1:-1]  # iteration 3 onward
        counted += r.size
        worst = max(worst, float(r.max()) if r.size else 0.0)
    ok = led.D < 1 and counted > 0 and worst <= cap
    criterion(6, ok, f"D={led.D:.3f}, worst ratio {worst:.2e} <= sqrt(D)+0.1={cap:.3f} over {counted} ratios", budget=120)
    assert ok


def test_criterion_07_impulse_semantics(criterion):
    s1, g1 = 0.3, 0.55
    sch = ImpulseSchedule([s1], [g1], 1.0)
    spec = build_scalar_example(PI2, 0.0, 0.4, lambda s, y: np.zeros_like(y), np.cos, sch, r_prime=lambda s: -np.sin(s))
    grid = TimeGrid.build(sch, 64)
    sol = solve(1, spec, None, grid)
    t, y = grid.nodes, sol.states[:, 0]
    imp = grid.impulse_mask()
    # hand-computed: cos(pi s) up to s1, then 0.4 tanh(cos(pi s1)) (cos s, -sin s), then free oscillation
    jump = 0.4 * math.tanh(math.cos(math.pi * s1))
    e_pre = float(np.max(np.abs(y[t <= s1] - np.cos(math.pi * t[t <= s1]))))
    h1 = spec.nonlin.h1[0](t[imp], np.array([y[grid.node_of(s1)]]))[:, 0]
    e_imp = float(np.max(np.abs(y[imp] - h1)))
    e_imp_hand = float(np.max(np.abs(y[imp] - jump * np.cos(t[imp]))))
    post = t > g1
    tau = t[post] - g1
    ref = jump * math.cos(g1) * np.cos(math.pi * tau) - jump * math.sin(g1) * np.sin(math.pi * tau) / math.pi
    e_post = float(np.max(np.abs(y[post] - ref)))
    ok = e_imp == 0.0 and e_imp_hand <= 1e-15 and e_pre <= 1e-14 and e_post <= 1e-13
    criterion(7, ok, f"impulse nodes vs h1 {e_imp:.1e}, vs hand {e_imp_hand:.1e}; before {e_pre:.1e}; after {e_post:.1e}", budget=10)
    assert ok


def test_criterion_08_galerkin_convergence(criterion):
    sch = ImpulseSchedule([0.4], [0.5], 1.0)
    spec = build_heat_example(32, sch, alpha=1.5, beta=0.25, eta=0.75)
    led = compute_constants(spec)
    grid = TimeGrid.build(sch, 64)
    rep = convergence_study([2, 4, 8, 16], spec, grid, 200, 7, led, ratio=2, cfg=PicardConfig(1e-12, 60))
    e, se = np.array(rep.errors), np.array(rep.stderr)
    decreasing = all(e[i + 1] <= e[i] + 3 * math.hypot(se[i], se[i + 1]) for i in range(len(e) - 1))
    slope = decay_slope(rep)
    checked = [(m, err, b) for m, err, b in zip(rep.m_values, e, rep.bounds) if math.isfinite(b)]
    dominated = all(err <= b for _, err, b in checked)
    # 2Q_k < 1 is out of reach with 32 modes; illustrate dominance on a feasible two-mode truncation
    # (alpha = 2, short horizon, both modes excited so the m = 1 error is not zero by symmetry)
    small = build_heat_example(2, FEASIBLE, alpha=2.0, beta=0.25, eta=0.75, y0=[0.5, 0.3])
    sled = compute_constants(small)
    srep = convergence_study([1], small, TimeGrid.build(FEASIBLE, 32), 200, 7, sled)
    s_dom = feasibility_check(sled).feasible and srep.errors[0] <= srep.bounds[0]
    ok = decreasing and slope <= -0.5 and dominated and s_dom
    twoq = max(2 * q for q in led.Q)
    detail = "errors " + ", ".join(f"{v:.2e}" for v in e) + f"; slope {slope:.2f} (<= -0.5)"
    detail += f"; bound finite for {len(checked)}/4 m (max 2Q_k={twoq:.3g})"
    detail += f"; 2-mode feasible case error {srep.errors[0]:.2e} <= bound {srep.bounds[0]:.2e}"
    criterion(8, ok, detail, budget=600)
    assert ok


def test_criterion_09_constants(criterion):
    sch = ImpulseSchedule([0.2, 0.6], [0.4, 0.8], 1.0)
    heat = build_heat_example(16, sch, beta=0.5, eta=0.75)
    nl = heat.nonlin
    norm2 = heat.spectrum.power_norm(-0.5) ** 2
    s = np.linspace(0.0, 1.0, 11)
    exact = (
        nl.L_K == norm2 / 100
        and nl.L_K == 1.0 / (100 * PI2)
        and nl.D_h1 == (1 / 9, 1 / 25)
        and nl.D_h2 == ((1 / 3) ** 2, (2 / 5) ** 2)
        and np.array_equal(nl.L_N(s), np.exp(-2 * s) / 9 * norm2)
    )
    worst = 0.0
    for name in sorted(GOLDEN):
        cfg, ref = GOLDEN[name]["config"], GOLDEN[name]["ledger"]
        led = compute_constants(golden_spec(cfg), M=frac(cfg["M"]), rho=frac(cfg["rho"]))
        pairs = list(zip(led.N + led.Q + led.M_k, [frac(v) for v in ref["N"] + ref["Q"] + ref["M_k"]]))
        pairs += [(led.D, frac(ref["D"])), (led.R**2, frac(ref["R_squared"])), (led.M_prime, frac(ref["M_prime"]))]
        worst = max(worst, max(abs(a - b) / max(abs(b), 1e-300) if b else abs(a) for a, b in pairs))
    ok = exact and worst <= 1e-12
    criterion(9, ok, f"example constants exact: {exact}; golden ledgers max rel error {worst:.1e}", budget=1)
    assert ok


REPRO = """
[problem]
builtin = "heat6"
modes = 8
s_points = [0.4]
sigma_points = [0.5]

[numerics]
steps_per_interval = 16
mc_samples = 10
n = 8
m_values = [1, 2, 4]
n_values = [2, 4]
n_ref = 8
seed = 5
"""


def test_criterion_10_reproducibility(criterion, tmp_path):
    cfg = tmp_path / "repro.toml"
    cfg.write_text(REPRO)
    experiments = {
        "solve": ["solution.csv", "picard.csv"],
        "converge": ["convergence.csv"],
        "coeffs": ["coeffs.csv"],
        "constants": ["constants.csv"],
        "mlcheck": ["mlcheck.csv"],
    }
    same, codes = [], []
    for exp, files in experiments.items():
        outs = []
        for run in ("a", "b"):
            d = tmp_path / f"{exp}-{run}"
            codes.append(main(["--config", str(cfg), "--experiment", exp, "--out", str(d)]))
            outs.append([(d / f).read_bytes() for f in files])
        same.append(outs[0] == outs[1])
    ok = all(c == 0 for c in codes) and all(same)
    criterion(10, ok, f"{sum(same)}/{len(same)} experiments byte-identical across repeated runs", budget=60)
    assert ok
