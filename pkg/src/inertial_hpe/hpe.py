"""Inertial hybrid proximal-extragradient driver.

At every iteration ``k >= 2`` an oracle returns a certificate
``(y^k, v^k, eps_k)`` with ``v^k`` in the ``eps_k``-enlargement of ``T`` at
``y^k``. The driver checks the relative-error inequality

    2 c_k eps_k + ||r^k||^2 + 4 alpha_k ||r^{k-1}||^2
        <= sigma^2 ||y^k - x^k||^2 + 4 alpha_k sigma^2 ||y^{k-1} - x^{k-1}||^2

where ``r^k = c_k v^k + y^k - x^k - alpha_k (x^k - x^{k-1})`` (the relaxed
variant drops the last term on the right), and then moves to

    x^{k+1} = x^k + alpha_k (x^k - x^{k-1}) - c_k v^k.
"""

import enum
import math
from collections.abc import Callable, Sequence
from dataclasses import dataclass, field

import numpy as np

from .exceptions import NonFiniteIterateError, StepViolationError, UsageError
from .space import as_vector, norm, norm_sq

__all__ = [
    "Variant",
    "HPEConfig",
    "ValidationReport",
    "validate_config",
    "parameter_condition",
    "Initialization",
    "IterationState",
    "StepCheck",
    "step_inequality",
    "step_inequality_slack",
    "slack_tolerance",
    "extragradient_update",
    "TraceRecord",
    "SolveResult",
    "run",
]

SLACK_REL_TOL = 1e-9
IDENTITY_TOL = 1e-12


class Variant(enum.Enum):
    STANDARD = "standard"
    RELAXED = "relaxed"


def _schedule(rule, k):
    if callable(rule):
        return float(rule(k))
    if isinstance(rule, Sequence) or isinstance(rule, np.ndarray):
        return float(rule[min(k, len(rule)) - 1])
    return float(rule)


@dataclass
class HPEConfig:
    """Parameters of the inertial HPE iteration.

    `c_schedule` and `alpha_schedule` are a constant, a sequence indexed
    from ``k = 1`` (the last entry repeats), or a callable ``k -> value``.
    An `alpha_schedule` of ``None`` means the constant ``alpha``; a
    `c_lower` of ``None`` means the smallest step over the run.
    """

    alpha: float = 0.0
    sigma: float = 0.0
    c_schedule: float | Sequence[float] | Callable[[int], float] = 1.0
    c_lower: float | None = None
    alpha_schedule: float | Sequence[float] | Callable[[int], float] | None = None
    variant: Variant = Variant.STANDARD
    max_iters: int = 50_000
    residual_tol: float = 1e-10
    enforce_step_inequality: bool = True

    def c(self, k):
        return _schedule(self.c_schedule, k)

    def alpha_k(self, k):
        if self.alpha_schedule is None:
            return float(self.alpha)
        return _schedule(self.alpha_schedule, k)

    def lower_step(self):
        if self.c_lower is not None:
            return float(self.c_lower)
        return min(self.c(k) for k in range(1, self.max_iters + 1))


@dataclass
class ValidationReport:
    ok: bool
    condition_name: str
    condition_value: float
    violations: list[str] = field(default_factory=list)

    def __bool__(self):
        return self.ok

    def __str__(self):
        rel = "<" if self.condition_value < 1 else "is not <"
        head = f"{self.condition_name} = {self.condition_value:.6g} {rel} 1"
        if self.ok:
            return head + ": ok"
        return head + "\n" + "\n".join(f"  violation: {v}" for v in self.violations)


def parameter_condition(alpha, sigma, variant=Variant.STANDARD):
    """Left side of the parameter condition that must stay below 1.

    Standard: ``alpha (5 + 4 sigma^2) + sigma^2``; relaxed: ``5 alpha + sigma^2``.
    """
    variant = Variant(variant)
    if variant is Variant.STANDARD:
        return alpha * (5.0 + 4.0 * sigma**2) + sigma**2
    return 5.0 * alpha + sigma**2


def validate_config(cfg):
    """Check every :class:`HPEConfig` invariant; never raises."""
    violations = []
    name = (
        "alpha*(5+4*sigma^2)+sigma^2" if Variant(cfg.variant) is Variant.STANDARD else "5*alpha+sigma^2"
    )
    try:
        value = parameter_condition(float(cfg.alpha), float(cfg.sigma), cfg.variant)
    except (TypeError, ValueError) as exc:
        return ValidationReport(False, name, math.nan, [f"bad alpha/sigma: {exc}"])
    if not value < 1:
        violations.append(f"{name} = {value:.6g} is not < 1")
    if not cfg.alpha >= 0:
        violations.append(f"alpha = {cfg.alpha} is negative")
    if not cfg.sigma >= 0:
        violations.append(f"sigma = {cfg.sigma} is negative")
    if not (isinstance(cfg.max_iters, int) and cfg.max_iters >= 2):
        violations.append(f"max_iters = {cfg.max_iters} must be an integer >= 2")
    if not cfg.residual_tol >= 0:
        violations.append(f"residual_tol = {cfg.residual_tol} must be >= 0")
    if violations and any("max_iters" in v for v in violations):
        return ValidationReport(False, name, value, violations)

    try:
        c_lower = cfg.lower_step()
        steps = [cfg.c(k) for k in range(1, cfg.max_iters + 1)]
        alphas = [cfg.alpha_k(k) for k in range(1, cfg.max_iters + 1)]
    except (TypeError, ValueError, IndexError) as exc:
        violations.append(f"schedule evaluation failed: {exc}")
        return ValidationReport(False, name, value, violations)

    if not c_lower > 0:
        violations.append(f"c_lower = {c_lower} must be > 0")
    bad_c = next((k for k, c in enumerate(steps, 1) if not (math.isfinite(c) and c >= c_lower)), None)
    if bad_c is not None:
        violations.append(f"c_{bad_c} = {steps[bad_c - 1]} is below c_lower = {c_lower}")
    bad_a = next((k for k, a in enumerate(alphas, 1) if not 0 <= a <= cfg.alpha), None)
    if bad_a is not None:
        violations.append(f"alpha_{bad_a} = {alphas[bad_a - 1]} is outside [0, alpha={cfg.alpha}]")
    bad_mono = next((k for k in range(1, len(alphas)) if alphas[k] < alphas[k - 1]), None)
    if bad_mono is not None:
        violations.append(f"alpha schedule decreases at k={bad_mono + 1}")
    return ValidationReport(not violations, name, value, violations)


@dataclass(frozen=True)
class Initialization:
    """The free starting points ``x^0, x^1, x^2, y^0, y^1, v^1``."""

    x0: np.ndarray
    x1: np.ndarray
    x2: np.ndarray
    y0: np.ndarray
    y1: np.ndarray
    v1: np.ndarray

    @classmethod
    def from_start(cls, x):
        """``x^0 = x^1 = x^2 = y^0 = y^1 = x`` and ``v^1 = 0``, so ``r^1 = 0``."""
        x = as_vector(x, "start point")
        return cls(x, x.copy(), x.copy(), x.copy(), x.copy(), np.zeros_like(x))


def _residual(c, v, y, x, x_prev, alpha):
    return c * v + y - x - alpha * (x - x_prev)


@dataclass(frozen=True)
class IterationState:
    """What the oracle and the step test need at iteration ``k``."""

    k: int
    x_prev2: np.ndarray
    x_prev: np.ndarray
    x_curr: np.ndarray
    y_prev: np.ndarray
    v_prev: np.ndarray
    c_prev: float
    alpha_prev: float
    r_prev: np.ndarray

    @classmethod
    def initial(cls, init, c1, alpha1):
        r1 = _residual(c1, init.v1, init.y1, init.x1, init.x0, alpha1)
        return cls(2, init.x0, init.x1, init.x2, init.y1, init.v1, float(c1), float(alpha1), r1)

    def recompute_r_prev(self):
        return _residual(self.c_prev, self.v_prev, self.y_prev, self.x_prev, self.x_prev2, self.alpha_prev)

    def advance(self, cert, c_k, alpha_k, x_next):
        r_k = _residual(c_k, cert.v, cert.y, self.x_curr, self.x_prev, alpha_k)
        return IterationState(
            self.k + 1, self.x_prev, self.x_curr, x_next, cert.y, cert.v, float(c_k), float(alpha_k), r_k
        )


@dataclass(frozen=True)
class StepCheck:
    lhs: float
    rhs: float
    r_norm: float

    @property
    def slack(self):
        return self.rhs - self.lhs


def step_inequality(state, cert, c_k, alpha_k, sigma, variant=Variant.STANDARD):
    """Both sides of the relative-error inequality at ``state.k``."""
    x, xp = state.x_curr, state.x_prev
    r_k = _residual(c_k, cert.v, cert.y, x, xp, alpha_k)
    lhs = 2.0 * c_k * cert.eps + norm_sq(r_k) + 4.0 * alpha_k * norm_sq(state.r_prev)
    rhs = sigma**2 * norm_sq(cert.y - x)
    if Variant(variant) is Variant.STANDARD:
        rhs += 4.0 * alpha_k * sigma**2 * norm_sq(state.y_prev - state.x_prev)
    return StepCheck(lhs, rhs, norm(r_k))


def step_inequality_slack(state, cert, c_k, alpha_k, sigma, variant=Variant.STANDARD):
    """``rhs - lhs`` of the relative-error inequality; ``>= 0`` means it holds."""
    return step_inequality(state, cert, c_k, alpha_k, sigma, variant).slack


def slack_tolerance(rhs):
    """Floating-point noise budget for the slack test."""
    return SLACK_REL_TOL * (1.0 + rhs)


def extragradient_update(state, cert, c_k, alpha_k):
    """Return ``x^{k+1} = x^k + alpha_k (x^k - x^{k-1}) - c_k v^k``.

    Also checks ``r^k = y^k - x^{k+1}``, which holds by construction.
    """
    x, xp = state.x_curr, state.x_prev
    x_next = x + alpha_k * (x - xp) - c_k * cert.v
    r_k = _residual(c_k, cert.v, cert.y, x, xp, alpha_k)
    err = float(np.max(np.abs(r_k - (cert.y - x_next)), initial=0.0))
    scale = 1.0 + float(np.max(np.abs(x), initial=0.0)) + float(np.max(np.abs(cert.y), initial=0.0))
    if np.all(np.isfinite(x_next)) and err > IDENTITY_TOL * scale:
        raise AssertionError(f"r^k = y^k - x^(k+1) identity off by {err:.3e} at k={state.k}")
    return x_next


@dataclass(frozen=True)
class TraceRecord:
    """Diagnostics for one iteration ``k``.

    ``phi`` and ``mu`` are filled only when a reference zero is known.
    """

    k: int
    step_sq: float
    gap_sq: float
    v_sq: float
    eps: float
    r_norm: float
    slack: float
    phi: float | None = None
    mu: float | None = None
    c: float = math.nan
    alpha: float = math.nan
    rhs: float = math.nan


@dataclass
class SolveResult:
    x: np.ndarray
    trace: list[TraceRecord]
    stop_reason: str
    y: np.ndarray
    v: np.ndarray
    eps: float
    sigma: float
    alpha: float
    reference: np.ndarray | None = None
    phi_init: tuple[float, float] | None = None
    gap_init: float = 0.0
    iterates: list[np.ndarray] | None = None

    @property
    def iterations(self):
        return len(self.trace)

    @property
    def converged(self):
        return self.stop_reason == "converged"


def _default_init(init):
    if isinstance(init, Initialization):
        return init
    return Initialization.from_start(init)


def run(oracle, cfg, init, reference=None, keep_iterates=False):
    """Run the inertial HPE iteration.

    Parameters
    ----------
    oracle : callable
        ``oracle(state, c_k, alpha_k) -> Certificate``.
    cfg : HPEConfig
    init : array_like or Initialization
        A start point (expanded by :meth:`Initialization.from_start`) or
        all six starting points.
    reference : array_like, optional
        A known zero ``z``; enables ``phi`` and ``mu`` in the trace.
    keep_iterates : bool
        Store every ``x^k`` (from ``x^2`` on) in ``SolveResult.iterates``.

    Raises
    ------
    UsageError
        Invalid configuration or initialization.
    StepViolationError
        With ``cfg.enforce_step_inequality``, a certificate failed the test.
    NonFiniteIterateError
        An iterate blew up.
    """
    report = validate_config(cfg)
    if not report.ok:
        raise UsageError("invalid configuration: " + "; ".join(report.violations))
    init = _default_init(init)
    c1, alpha1 = cfg.c(1), cfg.alpha_k(1)
    if alpha1 != 0 and not np.array_equal(init.x1, init.x0):
        raise UsageError("need alpha_1 = 0 or x^1 = x^0")

    sigma = float(cfg.sigma)
    z = None if reference is None else as_vector(reference, "reference")
    phi_prev = phi_curr = None
    gap_prev_sq = norm_sq(init.x1 - init.y1)
    phi_init = None
    if z is not None:
        phi_prev = 0.5 * norm_sq(init.x1 - z)
        phi_curr = 0.5 * norm_sq(init.x2 - z)
        phi_init = (0.5 * norm_sq(init.x0 - z), phi_prev)

    state = IterationState.initial(init, c1, alpha1)
    trace = []
    iterates = [state.x_curr] if keep_iterates else None
    stop = "max_iters"
    cert = None
    for k in range(2, cfg.max_iters + 1):
        c_k, alpha_k = cfg.c(k), cfg.alpha_k(k)
        cert = oracle(state, c_k, alpha_k)
        check = step_inequality(state, cert, c_k, alpha_k, sigma, cfg.variant)
        if cfg.enforce_step_inequality and check.slack < -slack_tolerance(check.rhs):
            raise StepViolationError(k, check.slack, check.rhs)
        x_next = extragradient_update(state, cert, c_k, alpha_k)
        if not (np.all(np.isfinite(x_next)) and np.all(np.isfinite(cert.y)) and math.isfinite(cert.eps)):
            raise NonFiniteIterateError(k)

        gap_sq = norm_sq(state.x_curr - cert.y)
        v_sq = norm_sq(cert.v)
        phi = mu = None
        if z is not None:
            phi = phi_curr
            mu = phi_curr - alpha_k * phi_prev + 2.0 * alpha_k * (1.0 + sigma**2) * gap_prev_sq
        trace.append(
            TraceRecord(
                k=k,
                step_sq=norm_sq(x_next - state.x_curr),
                gap_sq=gap_sq,
                v_sq=v_sq,
                eps=cert.eps,
                r_norm=check.r_norm,
                slack=check.slack,
                phi=phi,
                mu=mu,
                c=c_k,
                alpha=alpha_k,
                rhs=check.rhs,
            )
        )
        state = state.advance(cert, c_k, alpha_k, x_next)
        if keep_iterates:
            iterates.append(x_next)
        gap_prev_sq = gap_sq
        if z is not None:
            phi_prev, phi_curr = phi_curr, 0.5 * norm_sq(x_next - z)
        # residual_tol = 0 runs to max_iters, even through an exact zero
        if cfg.residual_tol > 0 and math.sqrt(v_sq) <= cfg.residual_tol and cert.eps <= cfg.residual_tol:
            stop = "converged"
            break

    return SolveResult(
        x=state.x_curr,
        trace=trace,
        stop_reason=stop,
        y=cert.y,
        v=cert.v,
        eps=cert.eps,
        sigma=sigma,
        alpha=float(cfg.alpha),
        reference=z,
        phi_init=phi_init,
        gap_init=norm_sq(init.x1 - init.y1),
        iterates=iterates,
    )
