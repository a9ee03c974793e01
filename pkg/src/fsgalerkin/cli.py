"""Command-line entry point.

Configs are TOML with sections ``[problem]``, ``[numerics]``,
``[experiment]`` and ``[output]``; see the README for every key. Exit codes:
0 success, 2 configuration error, 3 infeasible under ``--strict``,
4 numerical failure. Errors are reported on stderr as one JSON line.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from dataclasses import dataclass
from pathlib import Path

import numpy as np
import tomli

from . import __version__
from .exceptions import ConfigurationError, FSGalerkinError
from .fractional_calculus import mittag_leffler
from .harness import coefficient_convergence, convergence_study, decay_slope, report_svg
from .noise import derive_seed, sample_wiener
from .problem import (
    ImpulseSchedule,
    ProblemSpec,
    build_heat_example,
    build_scalar_example,
    compute_constants,
    feasibility_check,
)
from .solver import PicardConfig, TimeGrid, solution_csv, solve

__all__ = ["RunConfig", "load_config", "resolve", "build_problem", "run", "main"]

EXPERIMENTS = ("solve", "converge", "coeffs", "constants", "mlcheck")
EXIT_CONFIG, EXIT_INFEASIBLE, EXIT_NUMERIC = 2, 3, 4

DEFAULTS = {
    "problem": {
        "builtin": "heat6",
        "alpha": 1.5,
        "beta": 0.25,
        "eta": 0.75,
        "modes": 32,
        "horizon": 1.0,
        "s_points": [0.4],
        "sigma_points": [0.5],
        "radius": 1.0,
        # scalar6 only
        "a1": math.pi**2,
        "a2": 0.5,
        "a3": 0.5,
        "g": 0.2,
        "r": "const",
        "r_value": 1.0,
        "x0": 1.0,
        "v0": 0.0,
    },
    "numerics": {
        "steps_per_interval": 64,
        "picard_tol": 1e-10,
        "picard_max_iter": 60,
        "mc_samples": 200,
        "seed": 1,
        "bound_grid": 256,
        "n": 8,
        "m_values": [2, 4, 8, 16],
        "ratio": 2,
        "n_values": [2, 4, 8],
        "n_ref": 32,
    },
    "experiment": {"name": "solve"},
    "output": {"dir": "out"},
}


@dataclass(frozen=True)
class RunConfig:
    problem: dict
    numerics: dict
    experiment: str
    output: str

    def as_dict(self) -> dict:
        return {
            "problem": self.problem,
            "numerics": self.numerics,
            "experiment": {"name": self.experiment},
            "output": {"dir": self.output},
        }


def _merge(raw: dict) -> dict:
    unknown = set(raw) - set(DEFAULTS)
    if unknown:
        raise ConfigurationError(f"unknown sections: {sorted(unknown)}")
    out = {}
    for sec, defaults in DEFAULTS.items():
        given = raw.get(sec, {})
        if not isinstance(given, dict):
            raise ConfigurationError(f"[{sec}] must be a table")
        extra = set(given) - set(defaults) - ({"y0", "z0", "q_eigs"} if sec == "problem" else set())
        if extra:
            raise ConfigurationError(f"unknown keys in [{sec}]: {sorted(extra)}")
        out[sec] = {**defaults, **given}
    return out


def resolve(raw: dict) -> RunConfig:
    """Fill defaults and validate; every default used ends up in the result."""
    d = _merge(raw)
    p, nm = d["problem"], d["numerics"]
    if p["builtin"] not in ("heat6", "scalar6"):
        raise ConfigurationError(f"unknown builtin problem {p['builtin']!r}")
    name = d["experiment"]["name"]
    if name not in EXPERIMENTS:
        raise ConfigurationError(f"experiment must be one of {EXPERIMENTS}")
    positive = ["steps_per_interval", "picard_tol", "picard_max_iter", "mc_samples", "bound_grid", "n", "ratio", "n_ref"]
    for key in positive:
        if not isinstance(nm[key], (int, float)) or isinstance(nm[key], bool) or not nm[key] > 0:
            raise ConfigurationError(f"numerics.{key} must be a positive number")
    for key in ("steps_per_interval", "picard_max_iter", "mc_samples", "bound_grid", "n", "ratio", "n_ref", "seed"):
        if not isinstance(nm[key], int):
            raise ConfigurationError(f"numerics.{key} must be an integer")
    if nm["seed"] < 0:
        raise ConfigurationError("numerics.seed must be non-negative")
    for key in ("m_values", "n_values"):
        vals = nm[key]
        if not isinstance(vals, list) or not vals or any(isinstance(v, bool) or not isinstance(v, int) or v < 1 for v in vals):
            raise ConfigurationError(f"numerics.{key} must be a non-empty list of positive integers")
    for key in ("s_points", "sigma_points"):
        if not isinstance(p[key], list) or any(isinstance(v, bool) or not isinstance(v, (int, float)) for v in p[key]):
            raise ConfigurationError(f"problem.{key} must be a list of numbers")
    for key in ("modes",):
        if not isinstance(p[key], int) or p[key] < 1:
            raise ConfigurationError(f"problem.{key} must be a positive integer")
    for key in ("alpha", "beta", "eta", "horizon", "radius"):
        if not isinstance(p[key], (int, float)) or not p[key] > 0:
            raise ConfigurationError(f"problem.{key} must be positive")
    return RunConfig(p, nm, name, str(d["output"]["dir"]))


def load_config(path: str | Path | None) -> RunConfig:
    if path is None:
        return resolve({})
    try:
        with open(path, "rb") as fh:
            raw = tomli.load(fh)
    except (OSError, tomli.TOMLDecodeError) as exc:
        raise ConfigurationError(f"cannot read config: {exc}") from exc
    return resolve(raw)


def build_problem(cfg: RunConfig) -> ProblemSpec:
    p = cfg.problem
    sch = ImpulseSchedule(tuple(p["s_points"]), tuple(p["sigma_points"]), p["horizon"])
    if p["builtin"] == "heat6":
        return build_heat_example(
            p["modes"],
            sch,
            alpha=p["alpha"],
            beta=p["beta"],
            eta=p["eta"],
            y0=p.get("y0"),
            z0=p.get("z0"),
            q_eigs=p.get("q_eigs"),
            radius=p["radius"],
        )
    gval = float(p["g"])
    if p["r"] == "const":
        rv = float(p["r_value"])
        r = lambda s: np.full_like(np.asarray(s, dtype=float), rv)  # noqa: E731
        rp = lambda s: np.zeros_like(np.asarray(s, dtype=float))  # noqa: E731
    elif p["r"] == "sin":
        r, rp = np.sin, np.cos
    else:
        raise ConfigurationError("problem.r must be 'const' or 'sin'")
    return build_scalar_example(
        p["a1"],
        p["a2"],
        p["a3"],
        lambda s, y: np.full_like(np.asarray(y, dtype=float), gval),
        r,
        sch,
        r_prime=rp,
        x0=p["x0"],
        v0=p["v0"],
        g_lipschitz=0.0,
        g_bound=abs(gval),
        beta=p["beta"],
        eta=p["eta"],
    )


def _fmt(v) -> str:
    return f"{v:.17g}"


def _mlcheck_csv() -> str:
    rows = ["identity,alpha,beta,z,value,reference,abs_error"]
    z = np.linspace(-50.0, 5.0, 56)
    for zi, v in zip(z, mittag_leffler(z, 1.0, 1.0)):
        rows.append(",".join(["exp", "1", "1", _fmt(zi), _fmt(v), _fmt(math.exp(zi)), _fmt(abs(v - math.exp(zi)))]))
    x = np.linspace(0.0, 50.0, 51)
    for xi, v in zip(x, mittag_leffler(-(x**2), 2.0, 1.0)):
        rows.append(",".join(["cos", "2", "1", _fmt(-(xi**2)), _fmt(v), _fmt(math.cos(xi)), _fmt(abs(v - math.cos(xi)))]))
    for a in (1.2, 1.5, 1.8):
        for b in (1.0, 1.5, 2.0):
            zz = np.linspace(-20.0, 2.0, 12)
            lhs = mittag_leffler(zz, a, b)
            rhs = zz * mittag_leffler(zz, a, a + b) + 1.0 / math.gamma(b)
            for zi, u, w in zip(zz, lhs, rhs):
                rows.append(",".join(["recurrence", _fmt(a), _fmt(b), _fmt(zi), _fmt(u), _fmt(w), _fmt(abs(u - w))]))
    return "\n".join(rows) + "\n"


def _write(out: Path, name: str, text: str) -> str:
    (out / name).write_text(text, encoding="utf-8", newline="\n")
    return name


def run(cfg: RunConfig, strict: bool = False) -> int:
    """Execute ``cfg.experiment``; returns the process exit status."""
    out = Path(cfg.output)
    out.mkdir(parents=True, exist_ok=True)
    nm = cfg.numerics
    manifest = {"version": __version__, "config": cfg.as_dict(), "files": []}
    if cfg.experiment == "mlcheck":
        manifest["files"].append(_write(out, "mlcheck.csv", _mlcheck_csv()))
        _write(out, "manifest.json", json.dumps(manifest, indent=2, sort_keys=True) + "\n")
        return 0

    spec = build_problem(cfg)
    ledger = compute_constants(spec, nm["bound_grid"])
    report = feasibility_check(ledger)
    manifest["constants"] = ledger.as_dict()
    manifest["feasibility"] = report.as_dict()
    if not report.feasible and strict:
        _write(out, "manifest.json", json.dumps(manifest, indent=2, sort_keys=True, default=_json_default) + "\n")
        _error("infeasible", f"D={ledger.D:.6g}, 2Q={report.twoQ}")
        return EXIT_INFEASIBLE
    grid = TimeGrid.build(spec.schedule, nm["steps_per_interval"])
    pc = PicardConfig(nm["picard_tol"], nm["picard_max_iter"])
    seed = nm["seed"]

    if cfg.experiment == "constants":
        text = "name,value\n" + "".join(f"{k},{_fmt(v)}\n" for k, v in ledger.rows())
        manifest["files"].append(_write(out, "constants.csv", text))
    elif cfg.experiment == "solve":
        n = _check_n(nm["n"], spec)
        path = sample_wiener(spec.cov, grid.nodes, derive_seed(seed, 0))
        sol = solve(n, spec, path, grid, pc, ledger)
        manifest["files"].append(_write(out, "solution.csv", solution_csv(sol, spec.alpha)))
        hist = "iteration,difference\n" + "".join(f"{i + 1},{_fmt(d)}\n" for i, d in enumerate(sol.history))
        manifest["files"].append(_write(out, "picard.csv", hist))
        manifest["solve"] = {"converged": sol.converged, "flags": list(sol.flags), "sample_seed": sol.sample_seed}
    elif cfg.experiment == "converge":
        for m in nm["m_values"]:
            _check_n(nm["ratio"] * m, spec)
        rep = convergence_study(nm["m_values"], spec, grid, nm["mc_samples"], seed, ledger, nm["ratio"], pc)
        manifest["files"].append(_write(out, "convergence.csv", rep.csv()))
        slope = decay_slope(rep) if sum(e > 0 for e in rep.errors) >= 3 else None
        manifest["decay_slope"] = slope
        manifest["files"].append(_write(out, "convergence.svg", report_svg(rep, slope)))
    elif cfg.experiment == "coeffs":
        n_ref = _check_n(nm["n_ref"], spec)
        lines = ["n,n_ref,value,stderr"]
        for n in nm["n_values"]:
            est = coefficient_convergence(_check_n(n, spec), n_ref, spec, grid, nm["mc_samples"], seed, pc)
            lines.append(f"{n},{n_ref},{_fmt(est.mean)},{_fmt(est.stderr)}")
        manifest["files"].append(_write(out, "coeffs.csv", "\n".join(lines) + "\n"))
    _write(out, "manifest.json", json.dumps(manifest, indent=2, sort_keys=True, default=_json_default) + "\n")
    return 0


def _json_default(obj):
    if isinstance(obj, np.generic):
        return obj.item()
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    raise TypeError(type(obj).__name__)


def _check_n(n: int, spec: ProblemSpec) -> int:
    if not 0 <= n <= spec.modes:
        raise ConfigurationError(f"Galerkin dimension {n} exceeds modes={spec.modes}")
    return int(n)


def _error(category: str, message: str) -> None:
    sys.stderr.write(json.dumps({"error": category, "message": message}) + "\n")


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(prog="fsgalerkin", description=__doc__.splitlines()[0])
    parser.add_argument("--config", help="TOML run configuration")
    parser.add_argument("--seed", type=int, help="master seed (overrides numerics.seed)")
    parser.add_argument("--out", help="output directory (overrides output.dir)")
    parser.add_argument("--experiment", choices=EXPERIMENTS, help="experiment to run")
    parser.add_argument("--strict", action="store_true", help="fail with status 3 when infeasible")
    args = parser.parse_args(argv)
    try:
        cfg = load_config(args.config)
        raw = cfg.as_dict()
        if args.seed is not None:
            raw["numerics"]["seed"] = args.seed
        if args.out is not None:
            raw["output"]["dir"] = args.out
        if args.experiment is not None:
            raw["experiment"]["name"] = args.experiment
        cfg = resolve(raw)
        if cfg.experiment != "mlcheck":
            build_problem(cfg)  # surface problem errors as configuration errors
    except (ConfigurationError, FSGalerkinError, ValueError) as exc:
        _error("config", str(exc))
        return EXIT_CONFIG
    try:
        return run(cfg, strict=args.strict)
    except ConfigurationError as exc:
        _error("config", str(exc))
        return EXIT_CONFIG
    except (FSGalerkinError, FloatingPointError, ArithmeticError, np.linalg.LinAlgError) as exc:
        _error("numerical", f"{type(exc).__name__}: {exc}")
        return EXIT_NUMERIC


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
