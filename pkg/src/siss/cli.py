"""Command line experiment runner.

    siss profile|reconstruct|error-curve|stability --config FILE [overrides]

Every command is deterministic in (config, seed). CSV outputs start with a
comment line carrying the tool version and the resolved configuration.
Exit codes: 0 success, 2 configuration error, 3 numerical failure.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from .quadrature import QuadratureError
from .generator import (Direction, b2_tensor_generator, radon_profile_closed_form,
                        radon_quadrature_oracle)
from .lattice import REFERENCE_COEFFS, Signal, UnstableShiftsError, build_lattice
from .radon import radon_sample
from .reconstruction import (RankDeficientError, build_sampling_matrix, relative_error,
                             solve_coefficients, stability_check)
from .sampling import density_from_spec, draw_samples, trial_seed
from .stability import (InadmissibleGammaError, SingularFrameError, bound_constants,
                        default_gamma, monte_carlo_stability)

CONFIG_VERSION = 1
EXIT_CONFIG = 2
EXIT_NUMERIC = 3


class ConfigError(ValueError):
    pass


def fmt(v) -> str:
    if isinstance(v, (int, np.integer)) and not isinstance(v, bool):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return f"{float(v):.17g}"
    return str(v)


@dataclass
class ExperimentConfig:
    N: float = 1.0
    K: float = 0.5
    theta: float | None = None
    p: tuple[float, float] | None = (5.0 / 13.0, 12.0 / 13.0)
    n: int = 30
    seed: int = 0
    density: dict = field(default_factory=lambda: {"kind": "uniform"})
    gamma: float | None = None
    trials: int = 100
    coeffs: object = "paper-sec5"
    n_list: list = field(default_factory=lambda: [9, 15, 30, 60, 120, 240])
    version: int = CONFIG_VERSION

    @classmethod
    def from_dict(cls, doc: dict) -> "ExperimentConfig":
        doc = dict(doc)
        version = doc.pop("version", CONFIG_VERSION)
        if version != CONFIG_VERSION:
            raise ConfigError(f"unsupported config version {version}")
        unknown = set(doc) - set(cls.__dataclass_fields__)
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        if "theta" in doc and "p" in doc and doc["theta"] is not None and doc["p"] is not None:
            raise ConfigError("give exactly one of theta or p")
        if doc.get("theta") is not None:
            doc["p"] = None
        cfg = cls(**doc)
        cfg.validate()
        return cfg

    def validate(self) -> None:
        if (self.theta is None) == (self.p is None):
            raise ConfigError("give exactly one of theta or p")
        if self.p is not None:
            if len(self.p) != 2 or not any(self.p):
                raise ConfigError("p must be a nonzero pair")
            self.p = (float(self.p[0]), float(self.p[1]))
        if self.N <= 0 or self.K <= 0:
            raise ConfigError("N and K must be positive")
        if int(self.n) <= 0 or int(self.trials) <= 0:
            raise ConfigError("n and trials must be positive integers")
        if self.gamma is not None and not float(self.gamma) > 0:
            raise ConfigError(f"gamma must be positive, got {self.gamma!r}")
        if not self.n_list:
            raise ConfigError("n_list must be nonempty")
        try:
            density_from_spec(self.density, self.K)
            q = build_lattice(self.N, self.K).Q
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc
        if isinstance(self.coeffs, list) and len(self.coeffs) != q:
            raise ConfigError(f"coeffs has {len(self.coeffs)} entries, lattice has Q={q}")

    def to_dict(self) -> dict:
        return {"version": self.version, "N": self.N, "K": self.K, "theta": self.theta,
                "p": list(self.p) if self.p is not None else None, "n": self.n,
                "seed": self.seed, "density": self.density, "gamma": self.gamma,
                "trials": self.trials, "coeffs": self.coeffs, "n_list": list(self.n_list)}

    def direction(self) -> Direction:
        if self.p is not None:
            return Direction.from_vector(*self.p)
        return Direction(self.theta)

    def signal(self, grid) -> Signal:
        src = self.coeffs
        if src == "paper-sec5":
            if grid.Q != 9:
                raise ConfigError("paper-sec5 coefficients need N=1, K=1/2 (Q=9)")
            return Signal(REFERENCE_COEFFS.ravel(), grid)
        if isinstance(src, dict) and "file" in src:
            doc = json.loads(Path(src["file"]).read_text())
            coeffs = doc["coeffs"] if isinstance(doc, dict) else doc
        elif isinstance(src, list):
            coeffs = src
        else:
            raise ConfigError(f"unrecognised coefficient source {src!r}")
        if len(coeffs) != grid.Q:
            raise ConfigError(f"coeffs has {len(coeffs)} entries, lattice has Q={grid.Q}")
        return Signal(np.asarray(coeffs, dtype=float), grid)


def header(cmd: str, cfg: ExperimentConfig) -> str:
    return f"# siss {__version__} {cmd} config={json.dumps(cfg.to_dict(), sort_keys=True)}\n"


def _csv(rows, columns) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for row in rows:
        w.writerow([fmt(v) for v in row])
    return buf.getvalue()


# --------------------------------------------------------------------------
# commands
# --------------------------------------------------------------------------

def cmd_profile(cfg: ExperimentConfig, points: int = 1001) -> str:
    d = cfg.direction()
    gen = b2_tensor_generator()
    prof = radon_profile_closed_form(d)
    lo, hi = prof.support
    pad = 0.1 * (hi - lo)
    ts = np.linspace(lo - pad, hi + pad, points)
    closed = prof(ts)
    quad = np.array([radon_quadrature_oracle(gen, d, float(t)) for t in ts])
    diff = np.abs(closed - quad)
    body = _csv(zip(ts, closed, quad, diff), ["t", "closed_form", "quadrature", "abs_diff"])
    return header("profile", cfg) + body + f"# max_abs_diff={fmt(diff.max())}\n"


def cmd_reconstruct(cfg: ExperimentConfig) -> str:
    grid = build_lattice(cfg.N, cfg.K)
    d = cfg.direction()
    sig = cfg.signal(grid)
    X = draw_samples(density_from_spec(cfg.density, cfg.K), int(cfg.n), int(cfg.seed))
    Y = radon_sample(sig, d, X.points)
    U = build_sampling_matrix(X, d, grid, sig.generator)
    result = solve_coefficients(U, Y)
    err = relative_error(sig.coeffs, result.coeffs)
    report = {
        "siss_version": __version__,
        "config": cfg.to_dict(),
        "coeffs": [float(v) for v in result.coeffs],
        "relative_error": err,
        "exact_zero": bool(err is None and not np.any(result.coeffs)),
        "sigma_min": result.sigma_min,
        "condition": result.condition,
        "lambda_min": result.lambda_min,
        "residual": result.residual,
        "signal": Signal(result.coeffs, grid).to_dict(),
    }
    return json.dumps(report, indent=2, sort_keys=True) + "\n"


def error_curve_rows(cfg: ExperimentConfig):
    grid = build_lattice(cfg.N, cfg.K)
    d = cfg.direction()
    sig = cfg.signal(grid)
    density = density_from_spec(cfg.density, cfg.K)
    rows = []
    for n in cfg.n_list:
        n = int(n)
        if n < grid.Q:
            rows.append([n, "nan", "nan", "nan", int(cfg.trials), "rank-deficient"])
            continue
        errors, deficient = [], 0
        for i in range(int(cfg.trials)):
            X = draw_samples(density, n, trial_seed(cfg.seed, i))
            U = build_sampling_matrix(X, d, grid, sig.generator)
            Y = U.entries @ sig.coeffs
            if stability_check(U):
                c = solve_coefficients(U, Y).coeffs
            else:
                deficient += 1
                c = np.linalg.lstsq(U.entries, Y, rcond=1e-10)[0]
            errors.append(relative_error(sig.coeffs, c) or 0.0)
        med, p10, p90 = np.percentile(errors, [50, 10, 90])
        rows.append([n, float(med), float(p10), float(p90), deficient,
                     "ok" if deficient == 0 else "partly-rank-deficient"])
    return rows


def cmd_error_curve(cfg: ExperimentConfig) -> str:
    rows = error_curve_rows(cfg)
    cols = ["n", "median_error", "p10", "p90", "rank_deficient_trials", "status"]
    return header("error-curve", cfg) + _csv(rows, cols)


def cmd_stability(cfg: ExperimentConfig, n_values=None) -> str:
    grid = build_lattice(cfg.N, cfg.K)
    d = cfg.direction()
    density = density_from_spec(cfg.density, cfg.K)
    b = bound_constants(d, grid, density)
    gamma = default_gamma(cfg.K, b) if cfg.gamma is None else float(cfg.gamma)
    rows = []
    for n in (n_values or cfg.n_list):
        r = monte_carlo_stability(int(cfg.trials), int(n), d, density, gamma, grid,
                                  seed=int(cfg.seed), constants=b)
        rows.append([r.n, r.gamma, r.epsilon_q, r.empirical_success_rate, b.c1p, b.c2p,
                     b.m2, b.M2, b.c_phi, r.seed, r.exponent, r.lower_bracket,
                     r.upper_bracket, r.uniform_success_rate, r.trials])
    cols = ["n", "gamma", "epsilon_q", "empirical_rate", "c1p", "c2p", "m2", "M2", "c_phi",
            "seed", "bernstein_exponent", "lower_bracket", "upper_bracket",
            "uniform_rate", "trials"]
    return header("stability", cfg) + _csv(rows, cols)


COMMANDS = {
    "profile": cmd_profile,
    "reconstruct": cmd_reconstruct,
    "error-curve": cmd_error_curve,
    "stability": cmd_stability,
}


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="siss", description=__doc__.splitlines()[0])
    ap.add_argument("--version", action="version", version=f"siss {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        sp = sub.add_parser(name)
        sp.add_argument("--config", type=Path, help="JSON experiment config")
        sp.add_argument("--seed", type=int)
        group = sp.add_mutually_exclusive_group()
        group.add_argument("--theta", type=float)
        group.add_argument("--px", type=float)
        sp.add_argument("--py", type=float)
        sp.add_argument("--n", type=int)
        sp.add_argument("--gamma", type=float)
        sp.add_argument("--trials", type=int)
        sp.add_argument("--n-list", type=lambda s: [int(v) for v in s.split(",")])
        sp.add_argument("--out", type=Path, help="write output here instead of stdout")
    return ap


def resolve_config(args) -> ExperimentConfig:
    doc = {}
    if args.config is not None:
        try:
            doc = json.loads(args.config.read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {args.config}: {exc}") from exc
        if not isinstance(doc, dict):
            raise ConfigError("config must be a JSON object")
    if args.theta is not None:
        doc["theta"], doc["p"] = args.theta, None
    elif args.px is not None or args.py is not None:
        if args.px is None or args.py is None:
            raise ConfigError("--px and --py go together")
        doc["p"], doc["theta"] = [args.px, args.py], None
    for key in ("seed", "n", "gamma", "trials", "n_list"):
        val = getattr(args, key)
        if val is not None:
            doc[key] = val
    return ExperimentConfig.from_dict(doc)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = resolve_config(args)
        text = COMMANDS[args.command](cfg)
    except InadmissibleGammaError as exc:
        lo, hi = exc.interval
        print(f"error: {exc}; admissible gamma in ({lo!r}, {hi!r})", file=sys.stderr)
        return EXIT_CONFIG
    except UnstableShiftsError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (ConfigError, ValueError, KeyError, TypeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (RankDeficientError, SingularFrameError, ArithmeticError, QuadratureError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    if args.out is not None:
        with open(args.out, "w", newline="\n") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return 0


if __name__ == "__main__":
    sys.exit(main())
