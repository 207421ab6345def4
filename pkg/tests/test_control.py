"""Controller synthesis, deviation laws and the error-dynamics regression."""

import numpy as np
import pytest

from eventlink import control, plant
from eventlink.errors import ConvergenceError

GRAVITY = 9.81


def table_controller(n=8):
    return control.ControllerConfig(
        q=10.0 * np.eye(n),
        r=np.eye(2),
        c=np.diag([1.0, 1.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0]),
        s_offset=np.array([0.0, 0.0, 0.0, 0.0, 2.5, 0.0, 0.0, 0.0]),
    )


@pytest.fixture(scope="module")
def uav():
    return plant.build_uav_model(0.1, GRAVITY, 1e-5 * np.eye(8))


@pytest.fixture(scope="module")
def gain(uav):
    return control.lqr_gain(uav, table_controller())


class TestLqrGain:
    def test_scalar_closed_form(self):
        model = plant.SystemModel(a=np.eye(1), b=np.eye(1), w=np.zeros((1, 1)))
        cfg = control.ControllerConfig(
            q=np.eye(1), r=np.eye(1), c=np.eye(1), s_offset=np.zeros(1)
        )
        gain = control.lqr_gain(model, cfg)
        golden = (1.0 + np.sqrt(5.0)) / 2.0
        assert gain.k[0, 0] == pytest.approx(golden / (golden + 1.0), abs=1e-9)

    def test_uncontrollable_rejected(self):
        model = plant.SystemModel(a=np.eye(1), b=np.zeros((1, 1)), w=np.zeros((1, 1)))
        cfg = control.ControllerConfig(
            q=np.eye(1), r=np.eye(1), c=np.eye(1), s_offset=np.zeros(1)
        )
        with pytest.raises(ConvergenceError):
            control.lqr_gain(model, cfg)

    def test_uav_closed_loop_stable(self, uav, gain):
        closed = uav.a - uav.b @ gain.k
        radius = np.max(np.abs(np.linalg.eigvals(closed)))
        assert radius < 1.0
        assert gain.spectral_radius == pytest.approx(radius, rel=1e-9)


class TestDeviation:
    def test_perfect_formation(self, uav):
        cfg = table_controller()
        rng = np.random.default_rng(0)
        x_l = rng.standard_normal(8)
        x_f = cfg.c @ x_l + cfg.s_offset
        np.testing.assert_allclose(control.deviation(x_f, x_l, cfg), np.zeros(8), atol=1e-14)

    def test_zero_leader_zero_offset(self):
        cfg = control.ControllerConfig(
            q=np.eye(8), r=np.eye(2),
            c=np.diag([1.0, 1, 0, 0, 1, 0, 0, 0]), s_offset=np.zeros(8),
        )
        x_f = np.arange(8.0)
        np.testing.assert_array_equal(control.deviation(x_f, np.zeros(8), cfg), x_f)

    def test_single_coordinate(self):
        cfg = table_controller()
        x_l = np.zeros(8)
        x_l[4] = 1.0
        e = control.deviation(np.zeros(8), x_l, cfg)
        expected = np.zeros(8)
        expected[4] = -3.5
        np.testing.assert_allclose(e, expected, atol=1e-14)

    def test_estimated_deviation_same_map(self):
        cfg = table_controller()
        rng = np.random.default_rng(1)
        x_f, x_hat = rng.standard_normal(8), rng.standard_normal(8)
        np.testing.assert_array_equal(
            control.estimated_deviation(x_f, x_hat, cfg),
            control.deviation(x_f, x_hat, cfg),
        )

    def test_selection_matrix_validation(self):
        with pytest.raises(ValueError):
            control.ControllerConfig(
                q=np.eye(2), r=np.eye(1), c=np.array([[1.0, 0.5], [0.0, 1.0]]),
                s_offset=np.zeros(2),
            )
        with pytest.raises(ValueError):
            control.ControllerConfig(
                q=np.eye(2), r=np.eye(1), c=np.diag([2.0, 1.0]), s_offset=np.zeros(2)
            )


class TestFollowerInput:
    def test_zero_deviation(self, gain):
        np.testing.assert_array_equal(control.follower_input(np.zeros(8), gain), np.zeros(2))

    def test_scalar_value(self):
        model = plant.SystemModel(a=np.eye(1), b=np.eye(1), w=np.zeros((1, 1)))
        cfg = control.ControllerConfig(
            q=np.eye(1), r=np.eye(1), c=np.eye(1), s_offset=np.zeros(1)
        )
        gain = control.lqr_gain(model, cfg)
        u = control.follower_input(np.ones(1), gain)
        assert u[0] == pytest.approx(-0.6180339887, abs=1e-9)

    def test_linearity(self, gain):
        rng = np.random.default_rng(2)
        e = rng.standard_normal(8)
        np.testing.assert_allclose(
            control.follower_input(2.0 * e, gain),
            2.0 * control.follower_input(e, gain),
            rtol=1e-12,
        )


class TestClosedLoop:
    def test_homogeneous_contraction(self, uav, gain):
        # perfect estimation, no noise, no leader input, zero offset:
        # the deviation contracts geometrically
        cfg = control.ControllerConfig(
            q=10.0 * np.eye(8), r=np.eye(2),
            c=np.diag([1.0, 1, 0, 0, 1, 0, 0, 0]), s_offset=np.zeros(8),
        )
        g = control.lqr_gain(uav, cfg)
        model = plant.SystemModel(a=uav.a, b=uav.b, w=np.zeros((8, 8)))
        rng = np.random.default_rng(3)
        x_l = np.zeros(8)
        x_f = rng.standard_normal(8) * 0.5
        norms = []
        for _ in range(400):
            e_hat = control.estimated_deviation(x_f, x_l, cfg)
            u = control.follower_input(e_hat, g)
            x_f = plant.step(model, x_f, u, rng)
            norms.append(np.linalg.norm(control.deviation(x_f, x_l, cfg)))
        assert norms[-1] <= 1e-6 * norms[0]

    def test_error_recursion_matches_direct_simulation(self, uav, gain):
        # core regression: the deviation recursion reproduces the directly
        # simulated deviation to near roundoff, 20 seeds x 100 slots
        cfg = table_controller()
        w_chol = np.linalg.cholesky(1e-5 * np.eye(8) + 0 * uav.a)
        for seed in range(20):
            rng = np.random.default_rng(seed)
            x_l = rng.standard_normal(8)
            x_f = rng.standard_normal(8)
            for _ in range(100):
                x_hat_l = x_l + 0.1 * rng.standard_normal(8)  # any estimate works
                u_l = 0.5 * rng.standard_normal(2)
                w_l = w_chol @ rng.standard_normal(8)
                w_f = w_chol @ rng.standard_normal(8)
                e_hat = control.estimated_deviation(x_f, x_hat_l, cfg)
                predicted = control.error_dynamics_step(
                    e_hat, x_hat_l, x_l, u_l, w_f, w_l, uav, gain, cfg
                )
                u_f = control.follower_input(e_hat, gain)
                x_l = uav.a @ x_l + uav.b @ u_l + w_l
                x_f = uav.a @ x_f + uav.b @ u_f + w_f
                direct = control.deviation(x_f, x_l, cfg)
                assert np.max(np.abs(direct - predicted)) <= 1e-10
