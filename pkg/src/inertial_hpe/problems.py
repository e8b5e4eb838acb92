"""Seeded test problems with known zeros.

* :func:`gen_quadratic` -- ``T(x) = Qx - b`` for the proximal point oracle.
* :func:`gen_composite` -- l1-regularized least squares split as
  ``A = grad 0.5 ||Mx - d||^2`` plus ``B = lam1 * d||.||_1`` for forward-backward.
* :func:`gen_saddle` -- skew bilinear coupling ``A`` plus a strongly
  monotone ``B`` for forward-backward-forward.

Reference solutions come from a dense solve or from plain (non-inertial)
methods written directly against numpy, so they do not depend on the code
they are used to check.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from .exceptions import UsageError
from .operators import (
    AbsSubdifferential,
    AffineMonotone,
    BoxNormalCone,
    Operator,
    QuadraticGradient,
    ScaledIdentity,
    Sum,
    operator_from_dict,
)
from .space import as_vector, norm

__all__ = [
    "ProblemInstance",
    "gen_quadratic",
    "gen_composite",
    "gen_saddle",
    "generate",
    "GENERATORS",
    "inclusion_residual",
]

SOLUTION_TOL = 1e-8


@dataclass
class ProblemInstance:
    """A monotone inclusion ``0 in T(x)``, optionally split as ``T = A + B``."""

    name: str
    T: Operator
    A: Operator | None = None
    B: Operator | None = None
    known_solution: np.ndarray | None = None
    metadata: dict = field(default_factory=dict)

    @property
    def dimension(self):
        if self.T.dim is not None:
            return self.T.dim
        return self.metadata.get("n")

    def residual(self, x):
        return inclusion_residual(self, x)

    def to_dict(self):
        d = {"name": self.name, "dimension": self.dimension, "metadata": dict(self.metadata)}
        if self.A is not None and self.B is not None:
            d["A"] = self.A.to_dict()
            d["B"] = self.B.to_dict()
        else:
            d["T"] = self.T.to_dict()
        d["known_solution"] = None if self.known_solution is None else self.known_solution.tolist()
        return d

    @classmethod
    def from_dict(cls, d):
        if not isinstance(d, dict):
            raise UsageError("problem description must be a mapping")
        A = B = None
        if "A" in d or "B" in d:
            if "A" not in d or "B" not in d:
                raise UsageError("a split problem needs both 'A' and 'B'")
            A, B = operator_from_dict(d["A"]), operator_from_dict(d["B"])
            T = Sum(A, B)
        elif "T" in d:
            T = operator_from_dict(d["T"])
        else:
            raise UsageError("problem needs either 'T' or both 'A' and 'B'")
        sol = d.get("known_solution")
        sol = None if sol is None else as_vector(sol, "known_solution")
        meta = dict(d.get("metadata") or {})
        if d.get("dimension") is not None:
            meta.setdefault("n", int(d["dimension"]))
        return cls(d.get("name", "problem"), T, A, B, sol, meta)


def inclusion_residual(problem, x):
    """Distance from ``0`` to ``T(x)``, or from ``-A(x)`` to ``B(x)`` for split problems."""
    x = np.asarray(x, dtype=float)
    if problem.A is not None and problem.B is not None:
        u = -problem.A.apply(x)
        lo, hi = problem.B.interval(x)
    elif problem.T.single_valued:
        return norm(problem.T.apply(x))
    else:
        u = np.zeros_like(x)
        lo, hi = problem.T.interval(x)
    if np.any(lo > hi):
        return math.inf
    return norm(u - np.clip(u, lo, hi))


def _verify(problem):
    if problem.known_solution is not None:
        res = inclusion_residual(problem, problem.known_solution)
        if not res <= SOLUTION_TOL:
            raise RuntimeError(f"{problem.name}: known solution has inclusion residual {res:.3e}")
        problem.metadata["solution_residual"] = res
    return problem


def _random_orthogonal(n, rng):
    q, r = np.linalg.qr(rng.normal(size=(n, n)))
    return q * np.sign(np.diag(r))


def gen_quadratic(n, condition_number=1.0, seed=0, b=None):
    """Strongly convex quadratic ``T(x) = Qx - b``.

    ``Q`` has eigenvalues log-spaced in ``[1, condition_number]`` in a
    random orthogonal basis; the zero is ``Q^{-1} b``. `b` defaults to a
    standard normal draw.
    """
    n = int(n)
    if n < 1 or not condition_number >= 1:
        raise UsageError("gen_quadratic needs n >= 1 and condition_number >= 1")
    rng = np.random.default_rng(seed)
    lam = np.logspace(0.0, math.log10(condition_number), n) if n > 1 else np.array([1.0])
    U = _random_orthogonal(n, rng)
    Q = (U * lam) @ U.T
    Q = 0.5 * (Q + Q.T)
    rhs = rng.normal(size=n) if b is None else as_vector(b, "b")
    T = QuadraticGradient(Q, rhs)
    sol = np.linalg.solve(Q, rhs)
    meta = {
        "generator": "quadratic",
        "n": n,
        "condition_number": float(condition_number),
        "seed": seed,
        "oracle": "ipp",
    }
    return _verify(ProblemInstance("quadratic", T, known_solution=sol, metadata=meta))


def _prox_grad_reference(Q, q, weight, tol=1e-12, max_iters=2_000_000):
    """Plain proximal gradient on ``0.5 x^T Q x - q^T x + weight ||x||_1`` with step ``1/L``."""
    L = float(np.linalg.eigvalsh(Q).max())
    if L <= 0:
        return np.zeros(q.size)
    x = np.zeros(q.size)
    for _ in range(max_iters):
        z = x - (Q @ x - q) / L
        x_new = np.sign(z) * np.maximum(np.abs(z) - weight / L, 0.0)
        if L * np.linalg.norm(x_new - x) <= tol:
            return x_new
        x = x_new
    raise RuntimeError("reference proximal gradient did not reach its tolerance")


def gen_composite(n, sparsity=0.2, seed=0, m=None, M=None, d=None, lam1=None):
    """Sparse regression ``min 0.5 ||Mx - d||^2 + lam1 ||x||_1`` as ``A + B``.

    ``M`` is ``m x n`` Gaussian (``m = 2n`` by default, so the problem is
    strongly convex), ``d = M x_true + noise`` with a fraction `sparsity`
    of nonzeros in ``x_true``, and ``lam1 = 0.1 ||M^T d||_inf``. Explicit
    `M`, `d`, `lam1` override the random draws.
    """
    n = int(n)
    if not 0 <= sparsity <= 1:
        raise UsageError("sparsity must lie in [0, 1]")
    rng = np.random.default_rng(seed)
    if M is None:
        m = 2 * n if m is None else int(m)
        M = rng.normal(size=(m, n)) / math.sqrt(m)
    else:
        M = np.array(M, dtype=float)
    if d is None:
        x_true = np.zeros(n)
        k = int(round(sparsity * n))
        support = rng.choice(n, size=k, replace=False)
        x_true[support] = rng.normal(size=k)
        d = M @ x_true + 0.01 * rng.normal(size=M.shape[0])
    else:
        d = as_vector(d, "d")
    Q = M.T @ M
    Q = 0.5 * (Q + Q.T)
    q = M.T @ d
    if lam1 is None:
        lam1 = 0.1 * float(np.abs(q).max())
    A = QuadraticGradient(Q, q)
    B = AbsSubdifferential(lam1, dim=n)
    sol = _prox_grad_reference(Q, q, lam1)
    meta = {
        "generator": "composite",
        "n": n,
        "m": int(M.shape[0]),
        "sparsity": float(sparsity),
        "lam1": float(lam1),
        "seed": seed,
        "oracle": "fb",
    }
    return _verify(ProblemInstance("composite", Sum(A, B), A, B, sol, meta))


def _extragradient_reference(K, b, lower, upper, tol=1e-13, max_iters=2_000_000):
    """Projected extragradient for ``F(x) = Kx - b`` over a box."""
    t = 0.5 / float(np.linalg.norm(K, 2))
    x = np.zeros(b.size)
    for _ in range(max_iters):
        y = np.clip(x - t * (K @ x - b), lower, upper)
        x_new = np.clip(x - t * (K @ y - b), lower, upper)
        if np.linalg.norm(x_new - x) / t <= tol:
            return x_new
        x = x_new
    raise RuntimeError("reference extragradient did not reach its tolerance")


def gen_saddle(n, seed=0, lam=1.0, coupling=None, box=None, zero_shift=False):
    """Bilinear saddle problem with skew ``A(x) = Sx - b`` and strongly monotone ``B``.

    ``S = [[0, K], [-K^T, 0]]`` with ``K`` Gaussian (or `coupling`), so
    ``A`` is monotone and ``||S||``-Lipschitz but not cocoercive.
    ``B = lam * I``, solved by ``(lam I + S) x = b``; with ``box=(lo, hi)``
    ``B`` also gets the normal cone of ``[lo, hi]^n`` and the zero comes
    from a reference extragradient run.
    """
    n = int(n)
    if n < 2 or n % 2:
        raise UsageError("gen_saddle needs an even n >= 2")
    h = n // 2
    rng = np.random.default_rng(seed)
    K = rng.normal(size=(h, h)) / math.sqrt(h) if coupling is None else np.array(coupling, dtype=float)
    if K.shape != (h, h):
        raise UsageError(f"coupling must be {h}x{h}")
    S = np.zeros((n, n))
    S[:h, h:] = K
    S[h:, :h] = -K.T
    b = np.zeros(n) if zero_shift else rng.normal(size=n)
    A = AffineMonotone(S, b)
    full = lam * np.eye(n) + S
    if box is None:
        B = ScaledIdentity(lam, dim=n)
        sol = np.linalg.solve(full, b)
    else:
        lo, hi = np.full(n, float(box[0])), np.full(n, float(box[1]))
        B = Sum(ScaledIdentity(lam, dim=n), BoxNormalCone(lo, hi))
        sol = _extragradient_reference(full, b, lo, hi)
    meta = {
        "generator": "saddle",
        "n": n,
        "lam": float(lam),
        "beta": A.beta,
        "seed": seed,
        "box": None if box is None else [float(box[0]), float(box[1])],
        "oracle": "fbf",
    }
    return _verify(ProblemInstance("saddle", Sum(A, B), A, B, sol, meta))


GENERATORS = {
    "quadratic": gen_quadratic,
    "composite": gen_composite,
    "saddle": gen_saddle,
}


def generate(name, **params):
    """Call a generator by name."""
    try:
        gen = GENERATORS[name]
    except KeyError:
        raise UsageError(f"unknown generator {name!r}; choose from {sorted(GENERATORS)}") from None
    return gen(**params)
