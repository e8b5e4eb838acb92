"""Numerical checks of the quantities behind the convergence argument.

With ``z`` a known zero, ``phi_k = 0.5 ||x^k - z||^2`` and

    mu_k = phi_k - alpha_k phi_{k-1} + 2 alpha_k (1 + sigma^2) ||x^{k-1} - y^{k-1}||^2

must decrease by at least ``(1 - alpha (5 + 4 sigma^2) - sigma^2) / 2 * ||x^k - y^k||^2``
per iteration. Infinite-series statements are checked through tail masses
over the final 10% of a trace.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from .exceptions import UsageError

__all__ = [
    "compute_mu",
    "decrease_constant",
    "MuReport",
    "check_mu_decrease",
    "Lemma1Report",
    "lemma1_check",
    "lemma1_inputs",
    "SeriesSummary",
    "SummabilityReport",
    "summability_report",
    "tail_window",
]

TAIL_FRACTION = 0.1
NOISE_REL_TOL = 1e-9
SUMMABLE_TAIL_TOL = 1e-10
LEMMA1_CAUCHY_TOL = 1e-10
LEMMA1_OSCILLATION_TOL = 1e-8
DELTA_TAIL_TOL = 1e-12
SERIES = ("step_sq", "gap_sq", "v_sq", "eps")


def tail_window(n):
    """Number of trailing entries making up the final 10% of a length-`n` sequence."""
    return max(1, math.ceil(TAIL_FRACTION * n))


def compute_mu(phi_k, phi_prev, alpha_k, sigma, gap_prev_sq):
    """``phi_k - alpha_k phi_prev + 2 alpha_k (1 + sigma^2) gap_prev_sq``."""
    return phi_k - alpha_k * phi_prev + 2.0 * alpha_k * (1.0 + sigma**2) * gap_prev_sq


def decrease_constant(alpha, sigma):
    """``(1 - alpha (5 + 4 sigma^2) - sigma^2) / 2``; positive under the parameter condition."""
    return 0.5 * (1.0 - alpha * (5.0 + 4.0 * sigma**2) - sigma**2)


@dataclass
class MuReport:
    constant: float
    pairs_checked: int
    violations: list[tuple[int, float, float]] = field(default_factory=list)
    weighted_gap_sum: float = 0.0
    gap_sum_bound: float = math.nan

    @property
    def ok(self):
        return not self.violations

    def to_dict(self):
        return {
            "constant": self.constant,
            "pairs_checked": self.pairs_checked,
            "violations": len(self.violations),
            "first_violations": [list(v) for v in self.violations[:10]],
            "weighted_gap_sum": self.weighted_gap_sum,
            "gap_sum_bound": self.gap_sum_bound,
        }


def check_mu_decrease(trace, alpha, sigma):
    """Check ``mu_{k+1} - mu_k <= -C ||x^k - y^k||^2`` on consecutive records.

    Each violation is ``(k, mu_{k+1} - mu_k, -C gap_sq_k)``. The report
    also carries ``C * sum gap_sq`` next to its telescoped bound
    ``mu_first + alpha * phi_last``; the bound need not be sharp.

    Raises
    ------
    UsageError
        The trace has no ``phi``/``mu`` (no reference zero was given).
    """
    if any(r.phi is None or r.mu is None for r in trace):
        raise UsageError("check_mu_decrease needs a trace recorded with a reference zero")
    C = decrease_constant(alpha, sigma)
    report = MuReport(constant=C, pairs_checked=max(len(trace) - 1, 0))
    for cur, nxt in zip(trace, trace[1:]):
        diff = nxt.mu - cur.mu
        bound = -C * cur.gap_sq
        if diff > bound + NOISE_REL_TOL * (1.0 + abs(cur.mu)):
            report.violations.append((cur.k, diff, bound))
    if len(trace) >= 2:
        report.weighted_gap_sum = C * math.fsum(r.gap_sq for r in trace[:-1])
        report.gap_sum_bound = trace[0].mu + alpha * trace[-2].phi
    return report


@dataclass
class Lemma1Report:
    hypothesis_violations: list[tuple[int, float]]
    delta_tail: float
    delta_summable: bool
    positive_part_total: float
    positive_part_tail: float
    oscillation: float

    @property
    def hypothesis_ok(self):
        return not self.hypothesis_violations

    @property
    def increments_summable(self):
        return self.positive_part_tail < LEMMA1_CAUCHY_TOL

    @property
    def limit_exists(self):
        return self.oscillation < LEMMA1_OSCILLATION_TOL

    def to_dict(self):
        return {
            "hypothesis_violations": len(self.hypothesis_violations),
            "delta_tail": self.delta_tail,
            "delta_summable": self.delta_summable,
            "positive_part_total": self.positive_part_total,
            "positive_part_tail": self.positive_part_tail,
            "increments_summable": self.increments_summable,
            "oscillation": self.oscillation,
            "limit_exists": self.limit_exists,
        }


def lemma1_check(phi, alpha_seq, delta):
    """Check ``phi[j+1] <= phi[j] + alpha[j] (phi[j] - phi[j-1]) + delta[j]``.

    All three sequences share one index; the inequality is tested for
    ``j = 1 .. len(phi) - 2`` (entry 0 of `alpha_seq` and `delta` is
    unused). Violations are reported as ``(j, excess)`` and are not fatal.
    The conclusions are judged by the tail mass of ``[phi_j - phi_{j-1}]_+``
    and the spread of ``phi`` over the final 10% of indices.
    """
    phi = np.asarray(phi, dtype=float)
    alpha_seq = np.asarray(alpha_seq, dtype=float)
    delta = np.asarray(delta, dtype=float)
    if not (phi.shape == alpha_seq.shape == delta.shape) or phi.ndim != 1:
        raise UsageError("phi, alpha_seq and delta must be 1-D sequences of equal length")
    if phi.size < 2:
        raise UsageError("lemma1_check needs at least two phi values")

    violations = []
    for j in range(1, phi.size - 1):
        rhs = phi[j] + alpha_seq[j] * (phi[j] - phi[j - 1]) + delta[j]
        if phi[j + 1] > rhs + NOISE_REL_TOL * (1.0 + abs(phi[j])):
            violations.append((j, float(phi[j + 1] - rhs)))

    window = tail_window(phi.size)
    inc = np.maximum(np.diff(phi), 0.0)
    d = delta[1:]
    return Lemma1Report(
        hypothesis_violations=violations,
        delta_tail=math.fsum(d[-tail_window(d.size):]),
        delta_summable=math.fsum(d[-tail_window(d.size):]) < DELTA_TAIL_TOL,
        positive_part_total=math.fsum(inc),
        positive_part_tail=math.fsum(inc[-tail_window(inc.size):]),
        oscillation=float(np.ptp(phi[-window:])),
    )


def lemma1_inputs(result):
    """``(phi, alpha_seq, delta)`` for :func:`lemma1_check` from a solve with a reference.

    Index ``j`` runs over ``phi_1 .. phi_{N+1}`` with
    ``delta_k = 2 alpha_k (1 + sigma^2) ||x^{k-1} - y^{k-1}||^2``.
    """
    if result.reference is None or result.phi_init is None:
        raise UsageError("lemma1_inputs needs a solve recorded with a reference zero")
    trace = result.trace
    sigma = result.sigma
    phi = [result.phi_init[1]] + [r.phi for r in trace]
    phi.append(0.5 * float(np.sum((result.x - result.reference) ** 2)))
    alpha_seq = [0.0] + [r.alpha for r in trace] + [0.0]
    gaps = [result.gap_init] + [r.gap_sq for r in trace]
    delta = [0.0] + [2.0 * r.alpha * (1.0 + sigma**2) * g for r, g in zip(trace, gaps)] + [0.0]
    return phi, alpha_seq, delta


@dataclass
class SeriesSummary:
    name: str
    total: float
    tail: float
    passed: bool
    partial_sums: np.ndarray

    def to_dict(self):
        return {"total": self.total, "tail": self.tail, "passed": self.passed}


@dataclass
class SummabilityReport:
    window: int
    series: dict[str, SeriesSummary]

    @property
    def passed(self):
        return all(s.passed for s in self.series.values())

    def to_dict(self):
        out = {"window": self.window, "passed": self.passed}
        out.update({name: s.to_dict() for name, s in self.series.items()})
        return out


def summability_report(trace):
    """Partial sums and tail masses of the four summable series.

    A series passes when its tail over the final 10% of iterations is
    below ``1e-10 * (1 + total)``. A single record has no tail to judge and
    passes trivially.
    """
    if not trace:
        raise UsageError("summability_report needs a non-empty trace")
    n = len(trace)
    window = tail_window(n)
    series = {}
    for name in SERIES:
        values = np.array([getattr(r, name) for r in trace], dtype=float)
        total = math.fsum(values)
        tail = math.fsum(values[-window:])
        passed = n == 1 or tail < SUMMABLE_TAIL_TOL * (1.0 + total)
        series[name] = SeriesSummary(name, total, tail, passed, np.cumsum(values))
    return SummabilityReport(window, series)
