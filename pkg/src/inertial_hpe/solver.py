"""High-level entry point: pick an oracle and default parameters, then run."""

import math
from dataclasses import dataclass

from .exceptions import ConfigurationError, UsageError
from .hpe import HPEConfig, Variant, run
from .oracles import derive_fbf_params, fb_params, make_oracle

__all__ = ["DEFAULTS", "SolverSetup", "setup", "solve"]

# (alpha, sigma) per oracle and variant; fbf derives sigma from its window.
DEFAULTS = {
    ("ipp", Variant.STANDARD): (0.1, 0.0),
    ("ipp", Variant.RELAXED): (0.1, 0.0),
    ("fb", Variant.STANDARD): (0.02, 0.9),
    ("fb", Variant.RELAXED): (0.03, 0.9),
    ("fbf", Variant.STANDARD): (0.05, None),
}
IPP_DEFAULT_STEP = 1.0


@dataclass
class SolverSetup:
    oracle_name: str
    oracle: object
    config: HPEConfig
    c_max: float
    sigma_bar: float | None = None


def setup(
    problem,
    oracle="ipp",
    alpha=None,
    sigma=None,
    c=None,
    variant=Variant.STANDARD,
    max_iters=50_000,
    tol=1e-10,
    enforce_step_inequality=True,
    sigma_bar=None,
):
    """Resolve defaults, check step bounds and bind the oracle.

    Raises
    ------
    ConfigurationError
        The requested step exceeds the oracle's bound, or the oracle does
        not fit the problem.
    """
    variant = Variant(variant)
    if (oracle, variant) not in DEFAULTS:
        raise ConfigurationError(f"oracle {oracle!r} does not support the {variant.value} variant")
    d_alpha, d_sigma = DEFAULTS[(oracle, variant)]
    alpha = d_alpha if alpha is None else float(alpha)
    c_max = math.inf
    fbf = None

    if oracle == "ipp":
        sigma = d_sigma if sigma is None else float(sigma)
        if sigma != 0:
            raise ConfigurationError("the proximal point oracle is exact and needs sigma = 0")
        T = problem.T
        if c is None:
            c = IPP_DEFAULT_STEP
    elif oracle in ("fb", "fbf"):
        if problem.A is None or problem.B is None:
            raise ConfigurationError(f"oracle {oracle!r} needs a split problem (A, B)")
        if oracle == "fb":
            if problem.A.gamma is None:
                raise ConfigurationError("fb needs a cocoercive A with declared gamma")
            sigma = d_sigma if sigma is None else float(sigma)
            c_max = fb_params(problem.A.gamma, sigma, alpha).c_max
            if c is None:
                c = c_max if math.isfinite(c_max) else 1.0
        else:
            if problem.A.beta is None:
                raise ConfigurationError("fbf needs a Lipschitz A with declared beta")
            try:
                fbf = derive_fbf_params(alpha, problem.A.beta, sigma_bar)
            except UsageError as exc:
                raise ConfigurationError(str(exc)) from None
            sigma = fbf.sigma if sigma is None else float(sigma)
            if sigma < fbf.sigma:
                raise ConfigurationError(
                    f"sigma={sigma:.6g} is below the value {fbf.sigma:.6g} induced by sigma_bar"
                )
            c_max = fbf.c_max
            if c is None:
                c = fbf.default_step
        T = None
    else:
        raise ConfigurationError(f"unknown oracle {oracle!r}")

    c = float(c)
    if not c > 0:
        raise ConfigurationError(f"step c must be > 0, got {c}")
    if c > c_max * (1 + 1e-12):
        raise ConfigurationError(f"step c={c:.6g} exceeds the {oracle} bound {c_max:.6g}")
    cfg = HPEConfig(
        alpha=alpha,
        sigma=sigma,
        c_schedule=c,
        c_lower=c,
        variant=variant,
        max_iters=max_iters,
        residual_tol=tol,
        enforce_step_inequality=enforce_step_inequality,
    )
    bound = make_oracle(
        oracle,
        T=T,
        A=problem.A,
        B=problem.B,
        sigma=sigma,
        c_max=c_max,
        relaxed=variant is Variant.RELAXED,
    )
    return SolverSetup(oracle, bound, cfg, c_max, None if fbf is None else fbf.sigma_bar)


def solve(problem, oracle="ipp", x0=None, keep_iterates=False, **options):
    """Solve `problem` with the named oracle; ``x0`` defaults to the origin."""
    s = setup(problem, oracle, **options)
    if x0 is None:
        x0 = [0.0] * problem.dimension
    return run(s.oracle, s.config, x0, reference=problem.known_solution, keep_iterates=keep_iterates)
