import math

import numpy as np
import pytest

from inertial_hpe.exceptions import ConfigurationError, InfeasibleParametersError, UsageError
from inertial_hpe.hpe import HPEConfig, Initialization, IterationState, Variant, parameter_condition, run
from inertial_hpe.operators import (
    AbsSubdifferential,
    BoxNormalCone,
    QuadraticGradient,
    ScaledIdentity,
    Skew,
    Sum,
    enlargement_membership,
)
from inertial_hpe.oracles import (
    derive_fbf_params,
    fb_oracle,
    fb_recursion,
    fbf_oracle,
    fbf_recursion,
    fbf_sigma,
    fbf_window,
    ipp_oracle,
    ipp_recursion,
    make_oracle,
)
from inertial_hpe.problems import gen_composite, gen_saddle


def _state(x_curr, x_prev=None):
    init = Initialization.from_start(x_curr)
    if x_prev is not None:
        init = Initialization(init.x0, np.asarray(x_prev, float), init.x2, init.y0, init.y1, init.v1)
    return IterationState.initial(init, 1.0, 0.0)


class TestIPP:
    def test_scaled_identity(self):
        cert = ipp_oracle(ScaledIdentity(1), _state([2.0]), 1.0, 0.0)
        np.testing.assert_allclose(cert.y, [1.0])
        np.testing.assert_allclose(cert.v, [1.0])
        assert cert.eps == 0

    def test_zero_is_fixed(self):
        T = QuadraticGradient(np.diag([1.0, 2.0]), [1.0, 4.0])
        cert = ipp_oracle(T, _state([1.0, 2.0]), 0.3, 0.1)
        np.testing.assert_allclose(cert.y, [1.0, 2.0], atol=1e-15)
        np.testing.assert_allclose(cert.v, [0.0, 0.0], atol=1e-14)

    def test_scalar_quadratic(self):
        cert = ipp_oracle(QuadraticGradient([[2.0]], [0.0]), _state([1.0], x_prev=[1.0]), 1.0, 0.1)
        # (1 + 2) y = 1
        np.testing.assert_allclose(cert.y, [1 / 3], rtol=1e-15)
        np.testing.assert_allclose(cert.v, [2 / 3], rtol=1e-15)


class TestFB:
    def test_zero_A_reduces_to_proximal_point(self):
        A = QuadraticGradient(np.zeros((2, 2)))
        B = AbsSubdifferential(1.0)
        state = _state([3.0, -0.2])
        cert = fb_oracle(A, B, state, 0.5, 0.0, sigma=0.9)
        ipp = ipp_oracle(B, state, 0.5, 0.0)
        np.testing.assert_array_equal(cert.y, ipp.y)
        np.testing.assert_array_equal(cert.v, ipp.v)
        assert cert.eps == 0

    def test_fixed_point(self):
        A = QuadraticGradient(np.eye(1), [2.0])
        B = AbsSubdifferential(0.5)
        x_star = np.array([1.5])  # 1.5 - 2 + 0.5 = 0
        cert = fb_oracle(A, B, _state(x_star), 0.5, 0.02, sigma=0.9)
        np.testing.assert_allclose(cert.y, x_star, atol=1e-15)
        np.testing.assert_allclose(cert.v, [0.0], atol=1e-15)
        assert cert.eps == pytest.approx(0.0, abs=1e-30)

    def test_hand_evaluated_step(self):
        A = QuadraticGradient([[1.0]], [2.0])
        B = AbsSubdifferential(1.0)
        cert = fb_oracle(A, B, _state([0.0]), 0.5, 0.0, sigma=0.9)
        # soft(0 - 0.5 (0 - 2), 0.5) = soft(1, 0.5) = 0.5
        np.testing.assert_allclose(cert.y, [0.5])
        np.testing.assert_allclose(cert.v, [-1.0])
        assert cert.eps == pytest.approx(0.0625)

    def test_second_eps_term_and_relaxed_switch(self):
        A = QuadraticGradient([[2.0]], [0.0])
        B = ScaledIdentity(0.0)
        state = _state([1.0], x_prev=[0.0])
        full = fb_oracle(A, B, state, 0.5, 0.1, sigma=0.9)
        relaxed = fb_oracle(A, B, state, 0.5, 0.1, sigma=0.9, relaxed=True)
        # gamma = 1/2: eps2 = (0.1 / 0.5) * 1
        assert full.eps - relaxed.eps == pytest.approx(0.2)

    def test_step_bound(self):
        A = QuadraticGradient([[2.0]])
        with pytest.raises(ConfigurationError):
            fb_oracle(A, AbsSubdifferential(), _state([1.0]), 0.5, 0.0, sigma=0.5)  # bound 0.25
        with pytest.raises(UsageError):
            fb_oracle(Skew([[0.0, 1.0], [-1.0, 0.0]]), ScaledIdentity(0), _state([1.0, 0.0]), 0.1, 0.0, sigma=0.9)


class TestFBF:
    def test_zero_A_collapses_to_ipp(self):
        A = ScaledIdentity(0.0)
        B = AbsSubdifferential(1.0)
        state = _state([2.0, -0.3])
        cert = fbf_oracle(A, B, state, 0.7, 0.0)
        ipp = ipp_oracle(B, state, 0.7, 0.0)
        np.testing.assert_array_equal(cert.y, ipp.y)
        np.testing.assert_allclose(cert.v, ipp.v, atol=1e-15)

    def test_stationary_on_solution(self):
        A = Skew([[0.0, 1.0], [-1.0, 0.0]])
        B = BoxNormalCone([-1.0, -1.0], [1.0, 1.0])
        cert = fbf_oracle(A, B, _state([0.0, 0.0]), 0.5, 0.0)
        np.testing.assert_array_equal(cert.v, [0.0, 0.0])

    def test_hand_evaluated_step(self):
        A = Skew([[0.0, 1.0], [-1.0, 0.0]])
        B = ScaledIdentity(0.0)
        state = _state([1.0, 0.0])
        cert = fbf_oracle(A, B, state, 0.1, 0.0)
        np.testing.assert_allclose(cert.y, [1.0, 0.1], atol=1e-15)
        x_next = state.x_curr - 0.1 * cert.v
        np.testing.assert_allclose(x_next, [0.99, 0.1], atol=1e-15)

    def test_step_bound_and_beta(self):
        A = Skew([[0.0, 1.0], [-1.0, 0.0]])
        with pytest.raises(ConfigurationError):
            fbf_oracle(A, ScaledIdentity(0), _state([1.0, 0.0]), 0.6, 0.0, c_max=0.5)


class TestDeriveFBFParams:
    def test_alpha_zero_window(self):
        lo, hi = fbf_window(0.0)
        assert hi == 0.5
        assert 0 <= lo < 1e-12
        p = derive_fbf_params(0.0, 2.0, sigma_bar=0.25)
        assert p.c_max == pytest.approx(math.sqrt(0.5 / 1.5) / 2.0, rel=1e-14)
        assert math.sqrt(0.5 / 1.5) == pytest.approx(0.5773502691896258)

    def test_zero_beta_unbounded(self):
        p = derive_fbf_params(0.1, 0.0)
        assert p.c_max == math.inf
        assert p.default_step == 1.0

    def test_nearly_empty_window(self):
        p = derive_fbf_params(0.19, 1.0)
        assert 0 < p.sigma_bar < 0.025
        assert parameter_condition(0.19, p.sigma) < 1

    @pytest.mark.parametrize("alpha", [0.0, 0.05, 0.1, 0.15, 0.19])
    def test_induced_sigma_meets_condition(self, alpha):
        p = derive_fbf_params(alpha, 1.0)
        lo, hi = fbf_window(alpha)
        assert p.sigma_bar == pytest.approx(0.5 * (lo + hi))
        assert p.sigma == pytest.approx(fbf_sigma(alpha, p.sigma_bar))
        assert p.sigma < 1
        assert parameter_condition(alpha, p.sigma) < 1
        lower = (1 - 5 * alpha - p.sigma**2 * (4 * alpha + 1)) / (2 * (p.sigma**2 + 1))
        assert lower <= p.sigma_bar * (1 + 1e-12)

    def test_errors(self):
        with pytest.raises(InfeasibleParametersError):
            derive_fbf_params(0.2, 1.0)
        with pytest.raises(InfeasibleParametersError):
            fbf_window(0.25)
        with pytest.raises(ConfigurationError):
            derive_fbf_params(0.0, 1.0, sigma_bar=0.5)
        with pytest.raises(ConfigurationError):
            derive_fbf_params(0.0, 1.0, sigma_bar=0.0)


def _driver(problem, oracle_name, cfg, x0, **kw):
    oracle = make_oracle(oracle_name, T=problem.T, A=problem.A, B=problem.B, **kw)
    return run(oracle, cfg, x0, keep_iterates=True)


@pytest.mark.parametrize("seed", range(3))
def test_fb_driver_matches_recursion_and_certificates_are_members(seed):
    problem = gen_composite(8, 0.3, seed=seed)
    sigma, alpha = 0.9, 0.02
    c = 2 * problem.A.gamma * sigma**2
    cfg = HPEConfig(alpha=alpha, sigma=sigma, c_schedule=c, max_iters=40, residual_tol=0.0)
    x0 = np.random.default_rng(seed).normal(size=8)
    res = _driver(problem, "fb", cfg, x0, sigma=sigma)
    ref = fb_recursion(problem.A, problem.B, x0, c, alpha, len(res.iterates) - 1)
    np.testing.assert_allclose(np.array(res.iterates), np.array(ref), rtol=0, atol=1e-12)
    assert min(r.slack for r in res.trace) >= -1e-9

    oracle = make_oracle("fb", A=problem.A, B=problem.B, sigma=sigma)
    state = IterationState.initial(Initialization.from_start(x0), c, alpha)
    for _ in range(10):
        cert = oracle(state, c, alpha)
        assert enlargement_membership(problem.T, cert)
        state = state.advance(cert, c, alpha, state.x_curr + alpha * (state.x_curr - state.x_prev) - c * cert.v)


@pytest.mark.parametrize("seed", range(3))
def test_fbf_driver_matches_recursion_and_certificates_are_members(seed):
    problem = gen_saddle(6, seed=seed, box=(-0.5, 0.5))
    p = derive_fbf_params(0.05, problem.A.beta)
    c = p.default_step
    cfg = HPEConfig(alpha=0.05, sigma=p.sigma, c_schedule=c, max_iters=40, residual_tol=0.0)
    x0 = np.random.default_rng(seed).normal(size=6)
    res = _driver(problem, "fbf", cfg, x0, c_max=p.c_max)
    ref = fbf_recursion(problem.A, problem.B, x0, c, 0.05, len(res.iterates) - 1)
    np.testing.assert_allclose(np.array(res.iterates), np.array(ref), rtol=0, atol=1e-12)
    assert min(r.slack for r in res.trace) >= -1e-9

    oracle = make_oracle("fbf", A=problem.A, B=problem.B, c_max=p.c_max)
    state = IterationState.initial(Initialization.from_start(x0), c, 0.05)
    for _ in range(10):
        cert = oracle(state, c, 0.05)
        assert enlargement_membership(problem.T, cert)
        state = state.advance(cert, c, 0.05, state.x_curr + 0.05 * (state.x_curr - state.x_prev) - c * cert.v)


def test_ipp_driver_matches_recursion():
    T = Sum(ScaledIdentity(0.3), Skew([[0.0, 2.0], [-2.0, 0.0]]))
    cfg = HPEConfig(alpha=0.15, sigma=0.0, c_schedule=0.8, max_iters=60, residual_tol=0.0)
    res = run(make_oracle("ipp", T=T), cfg, [1.0, -1.0], keep_iterates=True)
    ref = ipp_recursion(T, [1.0, -1.0], 0.8, 0.15, len(res.iterates) - 1)
    np.testing.assert_allclose(np.array(res.iterates), np.array(ref), rtol=0, atol=1e-12)


def test_relaxed_fb_satisfies_its_inequality():
    problem = gen_composite(10, 0.2, seed=5)
    sigma, alpha = 0.9, 0.03
    c = 2 * problem.A.gamma * sigma**2
    cfg = HPEConfig(alpha=alpha, sigma=sigma, c_schedule=c, variant=Variant.RELAXED)
    res = run(make_oracle("fb", A=problem.A, B=problem.B, sigma=sigma, relaxed=True), cfg, np.zeros(10))
    assert res.converged
    assert min(r.slack for r in res.trace) >= -1e-9


def test_make_oracle_errors():
    with pytest.raises(UsageError):
        make_oracle("ipp")
    with pytest.raises(UsageError):
        make_oracle("fb", T=ScaledIdentity())
    with pytest.raises(UsageError):
        make_oracle("nope", A=ScaledIdentity(), B=ScaledIdentity())
