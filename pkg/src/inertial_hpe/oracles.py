"""Certificate oracles for the inertial proximal point, forward-backward and
forward-backward-forward methods, plus their step-size bounds.

Each oracle has the signature ``oracle(A, B, state, c_k, alpha_k)`` (or
``oracle(T, state, c_k, alpha_k)`` for the proximal point method) and can be
bound to a problem with :func:`make_oracle` for use with
:func:`inertial_hpe.hpe.run`. The ``*_recursion`` functions iterate the
classical two-point recursions directly, without certificates, and are
used to cross-check the driver.
"""

import math
from dataclasses import dataclass
from functools import partial

import numpy as np

from .exceptions import ConfigurationError, InfeasibleParametersError, UsageError
from .hpe import Initialization, parameter_condition
from .operators import Certificate, Provenance, apply, resolvent
from .space import norm_sq

__all__ = [
    "FBParams",
    "FBFParams",
    "fb_params",
    "derive_fbf_params",
    "fbf_sigma",
    "fbf_window",
    "ipp_oracle",
    "fb_oracle",
    "fbf_oracle",
    "make_oracle",
    "ipp_recursion",
    "fb_recursion",
    "fbf_recursion",
]

STEP_BOUND_RTOL = 1e-12
FBF_STEP_FRACTION = 0.99


def _inertial_point(state, alpha_k):
    x, xp = state.x_curr, state.x_prev
    return x + alpha_k * (x - xp)


def ipp_oracle(T, state, c_k, alpha_k):
    """Exact certificate ``(J(w), (w - J(w)) / c_k, 0)`` at ``w = x^k + alpha_k (x^k - x^{k-1})``."""
    w = _inertial_point(state, alpha_k)
    y = resolvent(T, c_k, w)
    return Certificate(y, (w - y) / c_k, 0.0, Provenance.EXACT_GRAPH)


@dataclass(frozen=True)
class FBParams:
    gamma: float
    sigma: float
    alpha: float
    c_max: float


def fb_params(gamma, sigma, alpha):
    """Step bound ``2 gamma sigma^2`` for the forward-backward embedding."""
    if gamma is None:
        raise UsageError("forward-backward needs a declared cocoercivity modulus gamma")
    return FBParams(float(gamma), float(sigma), float(alpha), 2.0 * gamma * sigma**2)


def fb_oracle(A, B, state, c_k, alpha_k, sigma, relaxed=False):
    """Forward-backward step recast as an enlargement certificate.

    ``y^k = J_{c_k B}(x^k - c_k A x^k + alpha_k (x^k - x^{k-1}))`` with
    ``eps_k = ||y^k - x^k||^2 / (4 gamma) + (alpha_k / gamma) ||x^k - x^{k-1}||^2``.
    With `relaxed` the second term of ``eps_k`` is dropped.

    Raises
    ------
    ConfigurationError
        ``c_k > 2 gamma sigma^2``.
    """
    params = fb_params(A.gamma, sigma, 0.0)
    if c_k > params.c_max * (1 + STEP_BOUND_RTOL):
        raise ConfigurationError(f"step c_k={c_k:.6g} exceeds 2*gamma*sigma^2={params.c_max:.6g}")
    x, xp = state.x_curr, state.x_prev
    w = _inertial_point(state, alpha_k)
    x_next = resolvent(B, c_k, w - c_k * apply(A, x))
    v = (w - x_next) / c_k
    if math.isinf(A.gamma):
        eps = 0.0
    else:
        eps = norm_sq(x_next - x) / (4.0 * A.gamma)
        if not relaxed:
            eps += alpha_k / A.gamma * norm_sq(x - xp)
    return Certificate(x_next, v, eps, Provenance.COMPOSITE)


@dataclass(frozen=True)
class FBFParams:
    """Step bound of the forward-backward-forward embedding.

    ``sigma`` is the relative-error tolerance induced by ``sigma_bar``.
    """

    beta: float
    alpha: float
    sigma_bar: float
    sigma: float
    c_max: float

    @property
    def default_step(self):
        return FBF_STEP_FRACTION * self.c_max if math.isfinite(self.c_max) else 1.0


def fbf_sigma(alpha, sigma_bar):
    """``sqrt((1 - 5 alpha - 2 sigma_bar) / (4 alpha + 2 sigma_bar + 1))``."""
    return math.sqrt((1.0 - 5.0 * alpha - 2.0 * sigma_bar) / (4.0 * alpha + 2.0 * sigma_bar + 1.0))


def _window_lower(alpha, sigma):
    return (1.0 - 5.0 * alpha - sigma**2 * (4.0 * alpha + 1.0)) / (2.0 * (sigma**2 + 1.0))


def _admissible(alpha, sigma_bar):
    """``sigma_bar`` lies in the window for its own induced sigma and that sigma meets the condition."""
    upper = (1.0 - 5.0 * alpha) / 2.0
    if not 0.0 <= sigma_bar < upper:
        return False
    s = fbf_sigma(alpha, sigma_bar)
    return (
        _window_lower(alpha, s) <= sigma_bar * (1 + 1e-12) + 1e-15
        and s < 1.0
        and parameter_condition(alpha, s) < 1.0
    )


def fbf_window(alpha, tol=1e-15):
    """Feasible ``(lower, upper)`` range for ``sigma_bar``.

    The upper end is ``(1 - 5 alpha) / 2``; the lower end couples to the
    induced sigma and is located by bisection between 0 and the upper end.

    Raises
    ------
    InfeasibleParametersError
        ``5 alpha >= 1`` (empty window).
    """
    upper = (1.0 - 5.0 * alpha) / 2.0
    if not alpha >= 0 or upper <= 0:
        raise InfeasibleParametersError(f"5*alpha = {5 * alpha:.6g} >= 1: sigma_bar window is empty")
    lo, hi = 0.0, upper
    if _admissible(alpha, lo):
        return lo, upper
    probe = 0.5 * upper
    if not _admissible(alpha, probe):
        raise InfeasibleParametersError(f"no admissible sigma_bar found for alpha={alpha}")
    hi = probe
    while hi - lo > tol * max(1.0, upper):
        mid = 0.5 * (lo + hi)
        if _admissible(alpha, mid):
            hi = mid
        else:
            lo = mid
    return hi, upper


def derive_fbf_params(alpha, beta, sigma_bar=None):
    """Pick ``sigma_bar`` (window midpoint by default) and the step bound.

    Returns ``FBFParams`` with ``c_max = sigma / beta`` where
    ``sigma = fbf_sigma(alpha, sigma_bar)``; ``c_max`` is ``inf`` for
    ``beta = 0``.

    Raises
    ------
    InfeasibleParametersError
        ``5 alpha >= 1``.
    ConfigurationError
        A supplied `sigma_bar` is outside the window.
    """
    if beta is None:
        raise UsageError("forward-backward-forward needs a declared Lipschitz modulus beta")
    if not beta >= 0:
        raise UsageError(f"beta must be >= 0, got {beta}")
    lower, upper = fbf_window(alpha)
    if sigma_bar is None:
        sigma_bar = 0.5 * (lower + upper)
    elif not (lower <= sigma_bar < upper and _admissible(alpha, sigma_bar)):
        raise ConfigurationError(f"sigma_bar={sigma_bar} outside feasible window [{lower:.6g}, {upper:.6g})")
    sigma = fbf_sigma(alpha, sigma_bar)
    c_max = math.inf if beta == 0 else sigma / beta
    return FBFParams(float(beta), float(alpha), float(sigma_bar), sigma, c_max)


def fbf_oracle(A, B, state, c_k, alpha_k, c_max=math.inf):
    """Forward-backward-forward step recast as an exact certificate.

    ``y^k = J_{c_k B}(x^k - c_k A x^k + alpha_k (x^k - x^{k-1}))`` and
    ``v^k = A y^k + b^k`` with ``b^k = (x^k - y^k) / c_k - A x^k + alpha_k (x^k - x^{k-1}) / c_k``
    in ``B y^k``. The driver update then reproduces
    ``x^{k+1} = y^k + c_k (A x^k - A y^k)``.
    """
    if A.beta is None:
        raise UsageError("forward-backward-forward needs a declared Lipschitz modulus beta")
    if c_k > c_max * (1 + STEP_BOUND_RTOL):
        raise ConfigurationError(f"step c_k={c_k:.6g} exceeds c_max={c_max:.6g}")
    x, xp = state.x_curr, state.x_prev
    ax = apply(A, x)
    y = resolvent(B, c_k, x - c_k * ax + alpha_k * (x - xp))
    ay = apply(A, y)
    b = (x - y) / c_k - ax + alpha_k / c_k * (x - xp)
    v = ay + b
    r = c_k * v + y - x - alpha_k * (x - xp)
    err = float(np.max(np.abs(r - c_k * (ay - ax))))
    scale = 1.0 + float(np.max(np.abs(x))) + float(np.max(np.abs(y)))
    if err > 1e-12 * scale:
        raise AssertionError(f"r^k = c_k (A y^k - A x^k) off by {err:.3e}")
    return Certificate(y, v, 0.0, Provenance.COMPOSITE)


def make_oracle(name, T=None, A=None, B=None, sigma=0.0, c_max=math.inf, relaxed=False):
    """Bind an oracle to a problem; returns ``oracle(state, c_k, alpha_k)``."""
    if name == "ipp":
        if T is None:
            raise UsageError("ipp oracle needs the operator T")
        return partial(ipp_oracle, T)
    if A is None or B is None:
        raise UsageError(f"{name} oracle needs the splitting pair (A, B)")
    if name == "fb":
        return partial(fb_oracle, A, B, sigma=sigma, relaxed=relaxed)
    if name == "fbf":
        return partial(fbf_oracle, A, B, c_max=c_max)
    raise UsageError(f"unknown oracle {name!r}")


def _seq(rule, k):
    if callable(rule):
        return float(rule(k))
    return float(rule)


def _starts(init):
    if not isinstance(init, Initialization):
        init = Initialization.from_start(init)
    return init.x1, init.x2


def ipp_recursion(T, init, c, alpha, n_iters):
    """``x^{k+1} = J_{c_k T}(x^k + alpha_k (x^k - x^{k-1}))`` from ``k = 2``.

    Returns ``[x^2, x^3, ..., x^{n_iters + 2}]``.
    """
    xp, x = _starts(init)
    out = [x]
    for k in range(2, n_iters + 2):
        xp, x = x, resolvent(T, _seq(c, k), x + _seq(alpha, k) * (x - xp))
        out.append(x)
    return out


def fb_recursion(A, B, init, c, alpha, n_iters):
    """``x^{k+1} = J_{c_k B}(x^k - c_k A x^k + alpha_k (x^k - x^{k-1}))``."""
    xp, x = _starts(init)
    out = [x]
    for k in range(2, n_iters + 2):
        ck = _seq(c, k)
        xp, x = x, resolvent(B, ck, x - ck * apply(A, x) + _seq(alpha, k) * (x - xp))
        out.append(x)
    return out


def fbf_recursion(A, B, init, c, alpha, n_iters):
    """Inertial Tseng step: ``y = J_{c B}(x - c A x + alpha (x - x_prev))``, ``x_next = y + c (A x - A y)``."""
    xp, x = _starts(init)
    out = [x]
    for k in range(2, n_iters + 2):
        ck = _seq(c, k)
        ax = apply(A, x)
        y = resolvent(B, ck, x - ck * ax + _seq(alpha, k) * (x - xp))
        xp, x = x, y + ck * (ax - apply(A, y))
        out.append(x)
    return out

