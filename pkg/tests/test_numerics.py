"""Numerics: discretization, Riccati solver, sorted decompositions,
water-filling."""

import numpy as np
import pytest

from eventlink import numerics
from eventlink.errors import ConvergenceError

GRAVITY = 9.81


def quadrotor_chain(g):
    return np.array(
        [
            [0.0, 1.0, 0.0, 0.0],
            [0.0, 0.0, g, 0.0],
            [0.0, 0.0, 0.0, 1.0],
            [0.0, 0.0, 0.0, 0.0],
        ]
    )


def taylor_series_oracle(a, ts, terms):
    """Truncated Taylor series for exp(a*ts), computed independently."""
    n = a.shape[0]
    out = np.eye(n)
    term = np.eye(n)
    for j in range(1, terms + 1):
        term = term @ (a * ts) / j
        out = out + term
    return out


def integral_series_oracle(a, ts, terms):
    """ts * sum_j (a*ts)^j / (j+1)! computed independently."""
    n = a.shape[0]
    out = np.eye(n)
    term = np.eye(n)
    for j in range(1, terms + 1):
        term = term @ (a * ts) / (j + 1)
        out = out + term
    return ts * out


class TestDiscretize:
    def test_zero_dynamics(self):
        a, b = numerics.discretize(np.zeros((2, 2)), np.array([[1.0], [0.0]]), 0.1)
        np.testing.assert_allclose(a, np.eye(2), atol=1e-15)
        np.testing.assert_allclose(b, np.array([[0.1], [0.0]]), atol=1e-15)

    def test_quadrotor_chain_against_series_oracle(self):
        chain = quadrotor_chain(GRAVITY)
        ts = 0.1
        a, b = numerics.discretize(chain, np.array([[0.0], [0.0], [0.0], [1.0]]), ts)
        np.testing.assert_allclose(a, taylor_series_oracle(chain, ts, 3), atol=1e-14)
        assert a[0, 1] == pytest.approx(0.1, abs=1e-14)
        assert a[0, 2] == pytest.approx(GRAVITY * 0.005, abs=1e-14)
        assert a[0, 3] == pytest.approx(GRAVITY * 0.1**3 / 6.0, abs=1e-14)
        expected_b = integral_series_oracle(chain, ts, 3) @ np.array(
            [[0.0], [0.0], [0.0], [1.0]]
        )
        np.testing.assert_allclose(b, expected_b, atol=1e-14)

    def test_nilpotent_series_terminates(self):
        # terms beyond the nilpotency index change nothing
        chain = quadrotor_chain(GRAVITY)
        short = taylor_series_oracle(chain, 0.1, 3)
        long = taylor_series_oracle(chain, 0.1, 10)
        assert np.max(np.abs(long - short)) <= 1e-15
        a, _ = numerics.discretize(chain, np.zeros((4, 1)), 0.1)
        np.testing.assert_allclose(a, long, atol=1e-14)

    def test_block_diagonal_structure(self):
        chain = quadrotor_chain(GRAVITY)
        full = np.zeros((8, 8))
        full[:4, :4] = chain
        full[4:, 4:] = chain
        b_cont = np.zeros((8, 2))
        b_cont[3, 0] = 1.0
        b_cont[7, 1] = 1.0
        a, b = numerics.discretize(full, b_cont, 0.1)
        a_block, b_block = numerics.discretize(
            chain, np.array([[0.0], [0.0], [0.0], [1.0]]), 0.1
        )
        assert np.all(a[:4, 4:] == 0.0)
        assert np.all(a[4:, :4] == 0.0)
        np.testing.assert_allclose(a[:4, :4], a_block, atol=1e-15)
        np.testing.assert_allclose(a[4:, 4:], a_block, atol=1e-15)
        np.testing.assert_allclose(b[:4, :1], b_block, atol=1e-15)

    def test_large_norm_against_scipy(self):
        from scipy.linalg import expm as scipy_expm

        rng = np.random.default_rng(5)
        for _ in range(20):
            m = rng.standard_normal((5, 5)) * 3.0
            np.testing.assert_allclose(
                numerics.expm(m), scipy_expm(m), rtol=1e-9, atol=1e-9
            )

    def test_input_validation(self):
        with pytest.raises(ValueError):
            numerics.discretize(np.zeros((2, 3)), np.zeros((2, 1)), 0.1)
        with pytest.raises(ValueError):
            numerics.discretize(np.zeros((2, 2)), np.zeros((3, 1)), 0.1)
        with pytest.raises(ValueError):
            numerics.discretize(np.zeros((2, 2)), np.zeros((2, 1)), 0.0)


class TestSolveDare:
    def test_scalar_zero_dynamics(self):
        s = numerics.solve_dare(
            np.array([[0.0]]), np.array([[1.0]]), np.array([[5.0]]), np.array([[1.0]])
        )
        assert s[0, 0] == pytest.approx(5.0, abs=1e-12)

    def test_scalar_golden_ratio(self):
        s = numerics.solve_dare(
            np.array([[1.0]]), np.array([[1.0]]), np.array([[1.0]]), np.array([[1.0]])
        )
        assert s[0, 0] == pytest.approx((1.0 + np.sqrt(5.0)) / 2.0, abs=1e-9)

    def test_not_stabilizable(self):
        with pytest.raises(ConvergenceError):
            numerics.solve_dare(
                np.array([[1.0]]),
                np.array([[0.0]]),
                np.array([[1.0]]),
                np.array([[1.0]]),
            )

    def test_uav_system_residual(self):
        from eventlink.plant import build_uav_model

        model = build_uav_model(0.1, GRAVITY, 1e-5 * np.eye(8))
        q = 10.0 * np.eye(8)
        r = np.eye(2)
        s = numerics.solve_dare(model.a, model.b, q, r)
        bs = model.b.T @ s
        rhs = bs @ model.a
        residual = (
            model.a.T @ s @ model.a
            - s
            - rhs.T @ np.linalg.solve(bs @ model.b + r, rhs)
            + q
        )
        assert np.linalg.norm(residual) <= 1e-8 * np.linalg.norm(s)
        assert np.linalg.norm(s - s.T) <= 1e-12 * np.linalg.norm(s)
        assert np.linalg.eigvalsh(s).min() >= -1e-10

    def test_random_systems_match_scipy(self):
        from scipy.linalg import solve_discrete_are

        rng = np.random.default_rng(11)
        for _ in range(10):
            n = rng.integers(2, 5)
            a = rng.standard_normal((n, n)) * 0.7
            b = rng.standard_normal((n, 2))
            g = rng.standard_normal((n, n))
            q = g @ g.T + 0.1 * np.eye(n)
            r = np.eye(2)
            s = numerics.solve_dare(a, b, q, r)
            np.testing.assert_allclose(
                s, solve_discrete_are(a, b, q, r), rtol=1e-7, atol=1e-9
            )


class TestSortedDecompositions:
    def test_reconstruction_random(self):
        rng = np.random.default_rng(17)
        for _ in range(1000):
            n = int(rng.integers(2, 9))
            g = rng.standard_normal((n, n))
            sym = g @ g.T
            eig = numerics.eigh_sorted(sym)
            rebuilt = (eig.basis * eig.values) @ eig.basis.T
            assert np.linalg.norm(rebuilt - sym) <= 1e-9 * max(
                1.0, np.linalg.norm(sym)
            )
            assert np.all(np.diff(eig.values) <= 1e-12)

            m = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
            svd = numerics.svd_sorted(m)
            rebuilt = (svd.left[:, : len(svd.singulars)] * svd.singulars) @ svd.right[
                :, : len(svd.singulars)
            ].conj().T
            assert np.linalg.norm(rebuilt - m) <= 1e-9 * np.linalg.norm(m)
            assert np.all(np.diff(svd.singulars) <= 0.0)

    def test_indefinite_rejected(self):
        with pytest.raises(ValueError):
            numerics.eigh_sorted(np.diag([1.0, -1.0]))


class TestWaterfill:
    def test_symmetric_modes(self):
        pi = np.array([1.0, 1.0])
        level = numerics.waterfill(lambda w: np.maximum(w - 1.0 / pi**2, 0.0), 2.0)
        assert level == pytest.approx(2.0, rel=1e-9)
        np.testing.assert_allclose(
            np.maximum(level - 1.0 / pi**2, 0.0), [1.0, 1.0], rtol=1e-8
        )

    def test_two_mode_piecewise_solution(self):
        # floors 1/pi^2 = (0.25, 1), budget 1: both modes active at w = 1.125
        pi = np.array([2.0, 1.0])
        level = numerics.waterfill(lambda w: np.maximum(w - 1.0 / pi**2, 0.0), 1.0)
        assert level == pytest.approx(1.125, rel=1e-8)
        np.testing.assert_allclose(
            np.maximum(level - 1.0 / pi**2, 0.0), [0.875, 0.125], rtol=1e-7
        )

    def test_monotone_in_budget(self):
        rng = np.random.default_rng(3)
        for _ in range(30):
            floors = rng.uniform(0.1, 2.0, size=4)
            allocate = lambda w: np.maximum(w - floors, 0.0)  # noqa: E731
            small = allocate(numerics.waterfill(allocate, 1.0))
            large = allocate(numerics.waterfill(allocate, 2.0))
            assert np.all(large >= small - 1e-9)

    def test_decreasing_direction(self):
        # total decreasing in the level parameter, as in the drift precoder
        floors = np.array([0.5, 2.0])
        pi = np.array([2.0, 1.0])

        def allocate(mu):
            return np.maximum(np.sqrt(1.0 / mu) * pi - floors, 0.0) / pi**2

        mu = numerics.waterfill(allocate, 1.0)
        assert float(np.sum(allocate(mu))) == pytest.approx(1.0, rel=1e-9)

    def test_unreachable_budget(self):
        with pytest.raises(ConvergenceError):
            numerics.waterfill(lambda w: np.zeros(2), 1.0)

    def test_invalid_budget(self):
        with pytest.raises(ValueError):
            numerics.waterfill(lambda w: np.ones(1) * w, 0.0)
