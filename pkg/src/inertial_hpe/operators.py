"""Catalog of maximally monotone operators and the enlargement calculus.

Every operator in the catalog knows how to evaluate its exact resolvent
``J_{cT} = (I + cT)^{-1}``. Single-valued kinds can also be applied
directly, and kinds whose graph is a product of intervals at each point
(``separable``) expose that interval so graph membership can be decided
componentwise.

The enlargement ``T^[eps](y)`` is the set of ``v`` with
``<y - w, v - u> >= -eps`` for every ``(w, u)`` in the graph of ``T``.
A :class:`Certificate` carries a triple ``(y, v, eps)`` together with the
rule that guarantees membership.
"""

import enum
import math
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from .exceptions import UnsupportedOperatorError, UsageError
from .space import as_vector, inner, norm, norm_sq

__all__ = [
    "Operator",
    "LinearPSD",
    "Skew",
    "ScaledIdentity",
    "AbsSubdifferential",
    "BoxNormalCone",
    "AffineMonotone",
    "QuadraticGradient",
    "Sum",
    "Provenance",
    "Certificate",
    "apply",
    "resolvent",
    "resolvent_residual",
    "sample_graph",
    "enlargement_membership",
    "exact_certificate",
    "cocoercive_certificate",
    "sum_certificate",
    "operator_from_dict",
]

PSD_EIG_FLOOR = -1e-10
SKEW_TOL = 1e-12
MEMBERSHIP_TOL = 1e-10
_N_LIPSCHITZ_PAIRS = 100


def _as_matrix(m, name):
    arr = np.array(m, dtype=float, copy=True)
    if arr.ndim != 2 or arr.shape[0] != arr.shape[1] or arr.shape[0] == 0:
        raise UsageError(f"{name} must be a non-empty square matrix, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise UsageError(f"{name} has non-finite entries")
    arr.setflags(write=False)
    return arr


def _frozen(v):
    v.setflags(write=False)
    return v


def _sym_min_eig(m):
    return float(np.linalg.eigvalsh(0.5 * (m + m.T)).min())


def _is_symmetric(m):
    return np.allclose(m, m.T, rtol=0.0, atol=SKEW_TOL * max(1.0, np.abs(m).max()))


def _check_psd(m, name):
    lo = _sym_min_eig(m)
    if lo < PSD_EIG_FLOOR:
        raise UsageError(f"{name}: M + M^T is not positive semidefinite (min eigenvalue {lo:.3e})")


def _check_dim(op, x):
    if op.dim is not None and x.shape != (op.dim,):
        raise UsageError(f"dimension mismatch: operator has n={op.dim}, vector has shape {x.shape}")


class Operator:
    """A maximally monotone operator on R^n.

    Subclasses set ``single_valued`` and ``separable`` and implement
    :meth:`resolvent` plus either :meth:`apply` or :meth:`interval`.

    Attributes
    ----------
    dim : int or None
        Dimension, or ``None`` when the operator acts on any R^n.
    gamma : float or None
        Declared cocoercivity modulus (``inf`` for the zero operator).
    beta : float or None
        Declared Lipschitz modulus.
    """

    kind = "operator"
    single_valued = False
    separable = False
    dim = None
    gamma = None
    beta = None

    def apply(self, x):
        raise UsageError(f"{self.kind} is set-valued and cannot be applied pointwise")

    def resolvent(self, c, x):
        raise UnsupportedOperatorError(f"{self.kind} has no exact resolvent")

    def interval(self, p):
        """Return ``(lo, hi)`` with ``T(p) = prod_i [lo_i, hi_i]``.

        An empty component (``lo_i > hi_i``) means ``p`` is outside the
        domain. Single-valued operators return the degenerate box
        ``(Ap, Ap)``.
        """
        if self.single_valued:
            u = self.apply(p)
            return u, u
        raise UnsupportedOperatorError(f"{self.kind} has no componentwise graph description")

    def domain(self):
        """Box ``(lower, upper)`` containing the domain, or ``None`` for all of R^n."""
        return None

    def graph_point(self, w, rng):
        """Return some ``u`` in ``T(w)`` for ``w`` in the domain."""
        if self.single_valued:
            return self.apply(w)
        lo, hi = self.interval(w)
        return np.clip(rng.normal(scale=2.0, size=w.shape), lo, hi)

    def to_dict(self):
        raise NotImplementedError

    def _declare(self, gamma, beta):
        if gamma is not None:
            gamma = float(gamma)
            if not gamma > 0:
                raise UsageError(f"declared gamma must be > 0, got {gamma}")
        if beta is not None:
            beta = float(beta)
            if not beta >= 0:
                raise UsageError(f"declared beta must be >= 0, got {beta}")
        self.gamma = gamma
        self.beta = beta

    def _verify_lipschitz(self):
        if self.beta is None or not self.single_valued:
            return
        n = self.dim or 3
        rng = np.random.default_rng(0)
        for _ in range(_N_LIPSCHITZ_PAIRS):
            x = rng.uniform(-10, 10, n)
            y = rng.uniform(-10, 10, n)
            lhs = norm(self.apply(x) - self.apply(y))
            rhs = self.beta * norm(x - y)
            if lhs > rhs * (1 + 1e-9) + 1e-12:
                raise UsageError(
                    f"{self.kind}: declared beta={self.beta} fails sampled Lipschitz test "
                    f"({lhs:.6e} > {rhs:.6e})"
                )

    def __repr__(self):
        return f"{type(self).__name__}(dim={self.dim}, gamma={self.gamma}, beta={self.beta})"


class _MatrixOperator(Operator):
    """Affine operator ``x -> Mx - b`` with a factorization cache for resolvents."""

    single_valued = True

    def __init__(self, m, shift=None, name="M"):
        self.matrix = _as_matrix(m, name)
        self.dim = self.matrix.shape[0]
        if shift is None:
            shift = np.zeros(self.dim)
        self.shift = _frozen(as_vector(shift, "shift"))
        if self.shift.shape != (self.dim,):
            raise UsageError("shift has the wrong dimension")
        self.symmetric = _is_symmetric(self.matrix)
        if self.symmetric:
            lam, vecs = np.linalg.eigh(0.5 * (self.matrix + self.matrix.T))
            self._eig = (_frozen(lam), _frozen(vecs))
        else:
            self._eig = None
        self._lu = {}

    def apply(self, x):
        x = np.asarray(x, dtype=float)
        _check_dim(self, x)
        return self.matrix @ x - self.shift

    def _solve_shifted(self, c, rhs):
        """Solve ``(I + cM) p = rhs``."""
        if self._eig is not None:
            lam, vecs = self._eig
            return vecs @ ((vecs.T @ rhs) / (1.0 + c * lam))
        lu = self._lu.get(c)
        if lu is None:
            lu = scipy.linalg.lu_factor(np.eye(self.dim) + c * self.matrix)
            self._lu[c] = lu
        return scipy.linalg.lu_solve(lu, rhs)

    def resolvent(self, c, x):
        c = _check_step(c)
        x = np.asarray(x, dtype=float)
        _check_dim(self, x)
        return self._solve_shifted(c, x + c * self.shift)

    def _lambda_max(self):
        return float(self._eig[0].max()) if self._eig is not None else None

    def _default_moduli(self, gamma, beta):
        if beta is None:
            beta = float(np.linalg.norm(self.matrix, 2))
        if gamma is None and self.symmetric:
            lmax = self._lambda_max()
            gamma = math.inf if lmax <= 0 else 1.0 / lmax
        self._declare(gamma, beta)
        self._verify_lipschitz()


class LinearPSD(_MatrixOperator):
    """Linear map ``x -> Mx`` with ``M + M^T`` positive semidefinite."""

    kind = "linear_psd"

    def __init__(self, m, gamma=None, beta=None):
        super().__init__(m)
        _check_psd(self.matrix, self.kind)
        self._default_moduli(gamma, beta)

    def to_dict(self):
        return {"kind": self.kind, "M": self.matrix.tolist()}


class Skew(_MatrixOperator):
    """Linear map ``x -> Sx`` with ``S = -S^T``; monotone but not cocoercive."""

    kind = "skew"

    def __init__(self, s, beta=None):
        super().__init__(s, name="S")
        asym = np.abs(self.matrix + self.matrix.T).max()
        if asym > SKEW_TOL:
            raise UsageError(f"skew: S + S^T has entry of size {asym:.3e}")
        self._default_moduli(None, beta)

    def to_dict(self):
        return {"kind": self.kind, "S": self.matrix.tolist()}


class AffineMonotone(_MatrixOperator):
    """Affine map ``x -> Mx - b`` with ``M`` positive semidefinite or skew."""

    kind = "affine_monotone"

    def __init__(self, m, b, gamma=None, beta=None):
        super().__init__(m, shift=b)
        _check_psd(self.matrix, self.kind)
        self._default_moduli(gamma, beta)

    def to_dict(self):
        return {"kind": self.kind, "M": self.matrix.tolist(), "b": self.shift.tolist()}


class QuadraticGradient(_MatrixOperator):
    """Gradient ``x -> Qx - b`` of ``0.5 x^T Q x - b^T x`` for symmetric PSD ``Q``.

    ``gamma`` is ``1 / lambda_max(Q)`` (Baillon-Haddad); a declared value
    must agree with it.
    """

    kind = "quadratic_gradient"

    def __init__(self, q, b=None, gamma=None, beta=None):
        super().__init__(q, shift=b, name="Q")
        if not self.symmetric:
            raise UsageError("quadratic_gradient: Q must be symmetric")
        _check_psd(self.matrix, self.kind)
        lmax = self._lambda_max()
        exact = math.inf if lmax <= 0 else 1.0 / lmax
        if gamma is not None and not math.isclose(float(gamma), exact, rel_tol=1e-8):
            raise UsageError(
                f"quadratic_gradient: declared gamma={gamma} differs from 1/lambda_max(Q)={exact}"
            )
        if beta is None:
            beta = max(lmax, 0.0)
        self._default_moduli(exact, beta)

    def to_dict(self):
        return {"kind": self.kind, "Q": self.matrix.tolist(), "b": self.shift.tolist()}


class ScaledIdentity(Operator):
    """``x -> lam * x`` with ``lam >= 0``."""

    kind = "scaled_identity"
    single_valued = True
    separable = True

    def __init__(self, lam=1.0, dim=None):
        lam = float(lam)
        if not lam >= 0:
            raise UsageError(f"scaled_identity: lam must be >= 0, got {lam}")
        self.lam = lam
        self.dim = dim
        self._declare(math.inf if lam == 0 else 1.0 / lam, lam)

    def apply(self, x):
        x = np.asarray(x, dtype=float)
        _check_dim(self, x)
        return self.lam * x

    def resolvent(self, c, x):
        c = _check_step(c)
        x = np.asarray(x, dtype=float)
        _check_dim(self, x)
        return x / (1.0 + c * self.lam)

    def to_dict(self):
        return {"kind": self.kind, "lam": self.lam, "dim": self.dim}


class AbsSubdifferential(Operator):
    """Componentwise subdifferential of ``weight * ||x||_1``."""

    kind = "abs_subdifferential"
    separable = True

    def __init__(self, weight=1.0, dim=None):
        weight = float(weight)
        if not weight >= 0:
            raise UsageError(f"abs_subdifferential: weight must be >= 0, got {weight}")
        self.weight = weight
        self.dim = dim

    def resolvent(self, c, x):
        c = _check_step(c)
        x = np.asarray(x, dtype=float)
        _check_dim(self, x)
        return soft_threshold(x, c * self.weight)

    def interval(self, p):
        p = np.asarray(p, dtype=float)
        w = self.weight
        lo = np.where(p > 0, w, -w)
        hi = np.where(p < 0, -w, w)
        return lo, hi

    def to_dict(self):
        return {"kind": self.kind, "weight": self.weight, "dim": self.dim}


class BoxNormalCone(Operator):
    """Normal cone of the box ``[lower, upper]``; infinite bounds allowed."""

    kind = "box_normal_cone"
    separable = True

    def __init__(self, lower, upper):
        lower = np.array(lower, dtype=float, ndmin=1)
        upper = np.array(upper, dtype=float, ndmin=1)
        if lower.shape != upper.shape or lower.ndim != 1:
            raise UsageError("box_normal_cone: lower and upper must be vectors of equal length")
        if np.any(np.isnan(lower)) or np.any(np.isnan(upper)) or np.any(lower > upper):
            raise UsageError("box_normal_cone: need lower <= upper componentwise")
        self.lower = _frozen(lower)
        self.upper = _frozen(upper)
        self.dim = lower.size

    def resolvent(self, c, x):
        _check_step(c)
        x = np.asarray(x, dtype=float)
        _check_dim(self, x)
        return np.clip(x, self.lower, self.upper)

    def interval(self, p):
        p = np.asarray(p, dtype=float)
        inside = (p >= self.lower) & (p <= self.upper)
        lo = np.where(p == self.lower, -np.inf, 0.0)
        hi = np.where(p == self.upper, np.inf, 0.0)
        lo = np.where(inside, lo, np.inf)
        hi = np.where(inside, hi, -np.inf)
        return lo, hi

    def domain(self):
        return self.lower, self.upper

    def to_dict(self):
        return {
            "kind": self.kind,
            "lower": [_encode_float(t) for t in self.lower],
            "upper": [_encode_float(t) for t in self.upper],
        }


class Sum(Operator):
    """Pointwise sum ``left + right``.

    The resolvent is exact when one summand is a :class:`ScaledIdentity`
    or when both summands are componentwise l1/box terms.
    """

    kind = "sum"

    def __init__(self, left, right):
        if left.dim is not None and right.dim is not None and left.dim != right.dim:
            raise UsageError(f"sum: dimension mismatch {left.dim} vs {right.dim}")
        self.left = left
        self.right = right
        self.dim = left.dim if left.dim is not None else right.dim
        self.single_valued = left.single_valued and right.single_valued
        self.separable = left.separable and right.separable
        beta = None
        if self.single_valued and left.beta is not None and right.beta is not None:
            beta = left.beta + right.beta
        self._declare(None, beta)

    def apply(self, x):
        if not self.single_valued:
            return super().apply(x)
        return self.left.apply(x) + self.right.apply(x)

    def interval(self, p):
        lo1, hi1 = self.left.interval(p)
        lo2, hi2 = self.right.interval(p)
        return lo1 + lo2, hi1 + hi2

    def domain(self):
        d1, d2 = self.left.domain(), self.right.domain()
        if d1 is None:
            return d2
        if d2 is None:
            return d1
        return np.maximum(d1[0], d2[0]), np.minimum(d1[1], d2[1])

    def graph_point(self, w, rng):
        return self.left.graph_point(w, rng) + self.right.graph_point(w, rng)

    def resolvent(self, c, x):
        c = _check_step(c)
        x = np.asarray(x, dtype=float)
        _check_dim(self, x)
        for a, b in ((self.left, self.right), (self.right, self.left)):
            if isinstance(a, ScaledIdentity):
                # x - p in c(lam p + T p)  <=>  p = J_{c' T}(x / (1 + c lam)), c' = c / (1 + c lam)
                scale = 1.0 + c * a.lam
                return b.resolvent(c / scale, x / scale)
        kinds = {type(self.left), type(self.right)}
        if kinds <= {AbsSubdifferential, BoxNormalCone}:
            weight = sum(t.weight for t in (self.left, self.right) if isinstance(t, AbsSubdifferential))
            boxes = [t for t in (self.left, self.right) if isinstance(t, BoxNormalCone)]
            p = soft_threshold(x, c * weight)
            for box in boxes:
                p = np.clip(p, box.lower, box.upper)
            if len(boxes) == 2 and np.any(
                np.maximum(boxes[0].lower, boxes[1].lower) > np.minimum(boxes[0].upper, boxes[1].upper)
            ):
                raise UnsupportedOperatorError("sum of disjoint boxes has empty domain")
            return p
        raise UnsupportedOperatorError(
            f"no exact resolvent for sum of {self.left.kind} and {self.right.kind}"
        )

    def to_dict(self):
        return {"kind": self.kind, "left": self.left.to_dict(), "right": self.right.to_dict()}


def soft_threshold(x, t):
    """Componentwise ``sign(x) * max(|x| - t, 0)``."""
    return np.sign(x) * np.maximum(np.abs(x) - t, 0.0)


def _check_step(c):
    c = float(c)
    if not c > 0 or not math.isfinite(c):
        raise UsageError(f"resolvent step c must be finite and > 0, got {c}")
    return c


# Module-level API mirroring the operator methods.

def apply(op, x):
    """Evaluate a single-valued operator at `x`."""
    if not op.single_valued:
        raise UsageError(f"{op.kind} is set-valued; apply() needs a single-valued operator")
    return op.apply(np.asarray(x, dtype=float))


def resolvent(op, c, x):
    """Return the unique ``p`` with ``x - p`` in ``c * T(p)``."""
    return op.resolvent(c, np.asarray(x, dtype=float))


def resolvent_residual(op, c, x, p):
    """How far ``p`` is from satisfying ``x - p in c * T(p)``.

    For single-valued operators this is ``||x - p - c T(p)||``. For
    set-valued operators with a componentwise graph it is the distance
    from ``(x - p) / c`` to ``T(p)`` (``inf`` when ``p`` is outside the
    domain).
    """
    x = np.asarray(x, dtype=float)
    p = np.asarray(p, dtype=float)
    if op.single_valued:
        return norm(x - p - c * op.apply(p))
    u = (x - p) / c
    lo, hi = op.interval(p)
    if np.any(lo > hi):
        return math.inf
    return norm(u - np.clip(u, lo, hi))


def sample_graph(op, center, n_samples=200, radius=10.0, seed=0):
    """Draw seeded graph pairs ``(w, u)`` with ``u in T(w)`` around `center`.

    ``w`` is uniform in the box of the given radius around `center`,
    projected onto the domain when the operator has a restricted one.
    """
    center = np.asarray(center, dtype=float)
    rng = np.random.default_rng(seed)
    dom = op.domain()
    pairs = []
    for _ in range(n_samples):
        w = center + rng.uniform(-radius, radius, center.shape)
        if dom is not None:
            w = np.clip(w, dom[0], dom[1])
        pairs.append((w, op.graph_point(w, rng)))
    return pairs


def enlargement_membership(op, cert, samples=None, n_samples=200, seed=0):
    """Sampled necessary-condition test for ``cert.v in T^[cert.eps](cert.y)``.

    Returns ``False`` if some graph pair ``(w, u)`` gives
    ``<y - w, v - u> < -eps - 1e-10``. A ``True`` result is evidence, not
    proof. When `samples` is omitted, :func:`sample_graph` supplies them.
    """
    if samples is None:
        samples = sample_graph(op, cert.y, n_samples=n_samples, seed=seed)
    for w, u in samples:
        if inner(cert.y - np.asarray(w), cert.v - np.asarray(u)) < -cert.eps - MEMBERSHIP_TOL:
            return False
    return True


class Provenance(enum.Enum):
    """Which enlargement rule guarantees a certificate."""

    EXACT_GRAPH = "ExactGraph"
    COCOERCIVE_RULE = "CocoerciveRule"
    SUM_RULE = "SumRule"
    COMPOSITE = "Composite"


@dataclass(frozen=True)
class Certificate:
    """A triple ``(y, v, eps)`` with ``v`` in the ``eps``-enlargement at ``y``."""

    y: np.ndarray
    v: np.ndarray
    eps: float
    provenance: Provenance = field(default=Provenance.EXACT_GRAPH)

    def __post_init__(self):
        y = np.asarray(self.y, dtype=float)
        v = np.asarray(self.v, dtype=float)
        if y.shape != v.shape:
            raise UsageError(f"certificate y and v differ in shape: {y.shape} vs {v.shape}")
        if not self.eps >= 0:
            raise UsageError(f"certificate eps must be >= 0, got {self.eps}")
        object.__setattr__(self, "y", y)
        object.__setattr__(self, "v", v)
        object.__setattr__(self, "eps", float(self.eps))

    def enlarged(self, eps):
        """Same ``(y, v)`` at a larger ``eps``."""
        if eps < self.eps:
            raise UsageError("can only enlarge eps")
        return Certificate(self.y, self.v, eps, self.provenance)


def exact_certificate(op, y):
    """``(y, T y, 0)`` for a single-valued operator."""
    y = np.asarray(y, dtype=float)
    return Certificate(y, apply(op, y), 0.0, Provenance.EXACT_GRAPH)


def cocoercive_certificate(op, x, z):
    """``A z`` lies in the enlargement of ``A`` at ``x`` with ``eps = ||x - z||^2 / (4 gamma)``."""
    if op.gamma is None:
        raise UsageError(f"{op.kind}: cocoercivity modulus gamma is not declared")
    x = np.asarray(x, dtype=float)
    z = np.asarray(z, dtype=float)
    eps = 0.0 if math.isinf(op.gamma) else norm_sq(x - z) / (4.0 * op.gamma)
    return Certificate(x, apply(op, z), eps, Provenance.COCOERCIVE_RULE)


def sum_certificate(c1, c2):
    """Certificate for ``T1 + T2`` from certificates of each summand at one base point."""
    if c1.y.shape != c2.y.shape or not np.array_equal(c1.y, c2.y):
        raise UsageError("sum_certificate requires certificates at the same base point")
    return Certificate(c1.y, c1.v + c2.v, c1.eps + c2.eps, Provenance.SUM_RULE)


def _encode_float(t):
    t = float(t)
    if math.isinf(t):
        return "inf" if t > 0 else "-inf"
    return t


def operator_from_dict(d):
    """Build an operator from its problem-file description."""
    if not isinstance(d, dict) or "kind" not in d:
        raise UsageError(f"operator description must be a mapping with a 'kind' key, got {d!r}")
    kind = d["kind"]
    try:
        if kind == "linear_psd":
            return LinearPSD(d["M"], gamma=d.get("gamma"), beta=d.get("beta"))
        if kind == "skew":
            return Skew(d["S"], beta=d.get("beta"))
        if kind == "scaled_identity":
            return ScaledIdentity(d.get("lam", 1.0), dim=d.get("dim"))
        if kind == "abs_subdifferential":
            return AbsSubdifferential(d.get("weight", 1.0), dim=d.get("dim"))
        if kind == "box_normal_cone":
            lower = [float(t) for t in d["lower"]]
            upper = [float(t) for t in d["upper"]]
            return BoxNormalCone(lower, upper)
        if kind == "affine_monotone":
            return AffineMonotone(d["M"], d["b"], gamma=d.get("gamma"), beta=d.get("beta"))
        if kind == "quadratic_gradient":
            return QuadraticGradient(d["Q"], d.get("b"), gamma=d.get("gamma"), beta=d.get("beta"))
        if kind == "sum":
            return Sum(operator_from_dict(d["left"]), operator_from_dict(d["right"]))
    except KeyError as exc:
        raise UsageError(f"operator '{kind}' is missing field {exc}") from None
    except (TypeError, ValueError) as exc:
        if isinstance(exc, UsageError):
            raise
        raise UsageError(f"operator '{kind}': {exc}") from None
    raise UsageError(f"unknown operator kind {kind!r}")
