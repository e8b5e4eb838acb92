"""Command-line front end.

Exit codes: 0 converged (``check``: feasible), 2 iteration cap reached or
iterates blew up, 3 relative-error inequality violated, 4 invalid
configuration, usage or problem file.
"""

import argparse
import csv
import json
import math
import os
import sys

import numpy as np

from .diagnostics import check_mu_decrease, lemma1_check, lemma1_inputs, summability_report
from .exceptions import (
    ConfigurationError,
    HPEError,
    InfeasibleParametersError,
    NonFiniteIterateError,
    StepViolationError,
    UsageError,
)
from .hpe import HPEConfig, Variant, run, validate_config
from .oracles import derive_fbf_params, fb_params, fbf_window
from .problems import GENERATORS, ProblemInstance, generate
from .solver import DEFAULTS, setup
from .space import norm

EXIT_CONVERGED = 0
EXIT_MAX_ITERS = 2
EXIT_STEP_VIOLATION = 3
EXIT_INVALID = 4

TRACE_FIELDS = ("k", "step_sq", "gap_sq", "v_sq", "eps", "r_norm", "slack", "phi", "mu")
CONFIG_KEYS = ("oracle", "alpha", "sigma", "c", "variant", "max_iters", "tol", "enforce_step_inequality", "sigma_bar")

_GEN_ALIASES = {"cond": "condition_number", "lambda": "lam", "lam1": "lam1"}


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_INVALID, f"{self.prog}: error: {message}\n")


def _number(text):
    try:
        return int(text)
    except ValueError:
        return float(text)


def parse_generate(text):
    """``"name,key=value,...,seed=S"`` -> ``(name, params)``; ``HPE_SEED`` overrides the seed."""
    parts = [p.strip() for p in text.split(",") if p.strip()]
    if not parts:
        raise UsageError("empty --generate specification")
    name, params = parts[0], {}
    if name not in GENERATORS:
        raise UsageError(f"unknown generator {name!r}; choose from {sorted(GENERATORS)}")
    for item in parts[1:]:
        if "=" not in item:
            raise UsageError(f"generator parameter {item!r} is not key=value")
        key, value = (s.strip() for s in item.split("=", 1))
        key = _GEN_ALIASES.get(key, key)
        if key == "box":
            lo, hi = value.split(":")
            params[key] = (float(lo), float(hi))
        else:
            try:
                params[key] = _number(value)
            except ValueError:
                raise UsageError(f"generator parameter {key}={value!r} is not numeric") from None
    env_seed = os.environ.get("HPE_SEED")
    if env_seed:
        params["seed"] = int(env_seed)
    params.setdefault("seed", 0)
    return name, params


def load_problem(path):
    """Read a JSON problem file; returns ``(ProblemInstance, config_section)``."""
    try:
        with open(path) as fh:
            doc = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise UsageError(f"cannot read problem file {path}: {exc}") from None
    if not isinstance(doc, dict):
        raise UsageError("problem file must contain a JSON object")
    config = doc.get("config") or {}
    unknown = set(config) - set(CONFIG_KEYS)
    if unknown:
        raise UsageError(f"unknown config keys {sorted(unknown)}")
    return ProblemInstance.from_dict(doc), config


def save_problem(problem, path, config=None):
    doc = problem.to_dict()
    if config:
        doc["config"] = config
    with open(path, "w") as fh:
        json.dump(doc, fh, indent=2)
        fh.write("\n")


def _resolve_problem(args):
    if args.problem and args.generate:
        raise UsageError("give either --problem or --generate, not both")
    if args.problem:
        return load_problem(args.problem)
    if args.generate:
        name, params = parse_generate(args.generate)
        try:
            return generate(name, **params), {}
        except TypeError as exc:
            raise UsageError(f"bad parameters for generator {name!r}: {exc}") from None
    return None, {}


def _options(args, file_config):
    """Merge problem-file config with command-line flags (flags win)."""
    opts = dict(file_config)
    for key in CONFIG_KEYS:
        value = getattr(args, key, None)
        if value is not None:
            opts[key] = value
    if isinstance(opts.get("enforce_step_inequality"), str):
        opts["enforce_step_inequality"] = opts["enforce_step_inequality"] == "on"
    opts.setdefault("oracle", "ipp")
    opts["variant"] = Variant(opts.get("variant", "standard"))
    return opts


def _fmt(value):
    if value is None:
        return ""
    if isinstance(value, (int, np.integer)):
        return str(value)
    return "%.17g" % value


def write_trace(trace, path):
    """CSV with header ``k,step_sq,gap_sq,v_sq,eps,r_norm,slack,phi,mu`` at 17 significant digits."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(TRACE_FIELDS)
        for rec in trace:
            writer.writerow([_fmt(getattr(rec, name)) for name in TRACE_FIELDS])


def _summary(problem, result, s):
    out = {
        "problem": problem.name,
        "dimension": problem.dimension,
        "oracle": s.oracle_name,
        "variant": s.config.variant.value,
        "alpha": s.config.alpha,
        "sigma": s.config.sigma,
        "c": s.config.c(1),
        "c_max": s.c_max if math.isfinite(s.c_max) else None,
        "sigma_bar": s.sigma_bar,
        "stop_reason": result.stop_reason,
        "iterations": result.iterations,
        "final_v_norm": norm(result.v),
        "final_eps": result.eps,
        "final_inclusion_residual": problem.residual(result.x),
        "summability": summability_report(result.trace).to_dict(),
    }
    if problem.known_solution is not None:
        out["distance_to_solution"] = norm(result.x - problem.known_solution)
        out["mu_decrease"] = check_mu_decrease(result.trace, s.config.alpha, s.config.sigma).to_dict()
        out["lemma1"] = lemma1_check(*lemma1_inputs(result)).to_dict()
    return out


def cmd_solve(args):
    problem, file_config = _resolve_problem(args)
    if problem is None:
        raise UsageError("solve needs --problem or --generate")
    if args.save_problem:
        save_problem(problem, args.save_problem)
    opts = _options(args, file_config)
    oracle = opts.pop("oracle")
    s = setup(
        problem,
        oracle,
        alpha=opts.get("alpha"),
        sigma=opts.get("sigma"),
        c=opts.get("c"),
        variant=opts["variant"],
        max_iters=int(opts.get("max_iters", 50_000)),
        tol=float(opts.get("tol", 1e-10)),
        enforce_step_inequality=opts.get("enforce_step_inequality", True),
        sigma_bar=opts.get("sigma_bar"),
    )
    report = validate_config(s.config)
    if not report.ok:
        raise ConfigurationError(str(report))

    x0 = np.zeros(problem.dimension)
    result = run(s.oracle, s.config, x0, reference=problem.known_solution)
    if args.trace:
        write_trace(result.trace, args.trace)
    summary = _summary(problem, result, s)
    if args.summary:
        with open(args.summary, "w") as fh:
            json.dump(summary, fh, indent=2, sort_keys=True)
            fh.write("\n")
    print(f"stop reason: {result.stop_reason} after {result.iterations} iterations")
    print(f"final ||v|| = {summary['final_v_norm']:.3e}, eps = {summary['final_eps']:.3e}")
    if "distance_to_solution" in summary:
        print(f"distance to known solution = {summary['distance_to_solution']:.3e}")
        print(f"mu-decrease violations: {summary['mu_decrease']['violations']}")
    print(f"summability tails: {'pass' if summary['summability']['passed'] else 'fail'}")
    return EXIT_CONVERGED if result.converged else EXIT_MAX_ITERS


def cmd_check(args):
    problem, file_config = _resolve_problem(args)
    if problem is not None and args.save_problem:
        save_problem(problem, args.save_problem)
    opts = _options(args, file_config)
    oracle = opts["oracle"]
    variant = opts["variant"]
    key = (oracle, variant)
    d_alpha, d_sigma = DEFAULTS.get(key, (0.0, 0.0))
    alpha = float(opts.get("alpha", d_alpha))
    sigma = opts.get("sigma", d_sigma)
    feasible = True

    print(f"oracle: {oracle}, variant: {variant.value}")
    if key not in DEFAULTS:
        print(f"  {oracle} cannot be used with the {variant.value} variant")
        feasible = False

    fbf = None
    try:
        lo, hi = fbf_window(alpha)
        print(f"fbf sigma_bar window: [{lo:.6g}, {hi:.6g})")
        if oracle == "fbf":
            fbf = derive_fbf_params(alpha, 0.0 if problem is None else problem.A.beta, opts.get("sigma_bar"))
            print(f"  sigma_bar = {fbf.sigma_bar:.6g}, induced sigma = {fbf.sigma:.6g}")
            if sigma is None:
                sigma = fbf.sigma
    except InfeasibleParametersError as exc:
        print(f"fbf sigma_bar window: empty ({exc})")
        if oracle == "fbf":
            feasible = False
    except ConfigurationError as exc:
        print(f"  {exc}")
        feasible = False
    if sigma is None:
        sigma = 0.0

    cfg = HPEConfig(alpha=alpha, sigma=float(sigma), c_schedule=1.0, c_lower=1.0, variant=variant, max_iters=2)
    report = validate_config(cfg)
    print(str(report))
    feasible &= report.ok

    if problem is not None:
        c = opts.get("c")
        bound = math.inf
        if oracle == "fb" and problem.A is not None and problem.A.gamma is not None:
            bound = fb_params(problem.A.gamma, float(sigma), alpha).c_max
            print(f"max step fb: 2*gamma*sigma^2 = {bound:.6g}")
        elif oracle == "fbf" and fbf is not None:
            bound = fbf.c_max
            print(f"max step fbf: sigma/beta = {bound:.6g} (default step {fbf.default_step:.6g})")
        elif oracle == "ipp":
            print("max step ipp: unbounded")
        if c is not None and float(c) > bound * (1 + 1e-12):
            print(f"  step c = {float(c):.6g} exceeds the bound")
            feasible = False

    print("feasible" if feasible else "infeasible")
    return EXIT_CONVERGED if feasible else EXIT_INVALID


def build_parser():
    parser = _Parser(prog="inertial-hpe", description="Inertial hybrid proximal-extragradient solver.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    for name, helptext in (("solve", "run the solver"), ("check", "validate parameters without solving")):
        p = sub.add_parser(name, help=helptext)
        src = p.add_argument_group("problem source")
        src.add_argument("--problem", metavar="FILE", help="JSON problem file")
        src.add_argument(
            "--generate",
            metavar="SPEC",
            help="generator spec such as 'quadratic,n=10,cond=100,seed=7'",
        )
        p.add_argument("--oracle", choices=("ipp", "fb", "fbf"))
        p.add_argument("--alpha", type=float)
        p.add_argument("--sigma", type=float)
        p.add_argument("--sigma-bar", dest="sigma_bar", type=float)
        p.add_argument("--c", type=float, help="constant step size c_k")
        p.add_argument("--variant", choices=("standard", "relaxed"))
        p.add_argument("--max-iters", dest="max_iters", type=int)
        p.add_argument("--tol", type=float)
        p.add_argument("--enforce-step-inequality", dest="enforce_step_inequality", choices=("on", "off"))
        p.add_argument("--save-problem", dest="save_problem", metavar="FILE")
        if name == "solve":
            p.add_argument("--trace", metavar="CSV")
            p.add_argument("--summary", metavar="JSON")
        p.set_defaults(func=cmd_solve if name == "solve" else cmd_check)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except StepViolationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_STEP_VIOLATION
    except NonFiniteIterateError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_MAX_ITERS
    except (HPEError, ValueError, RuntimeError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
