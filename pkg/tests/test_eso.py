import numpy as np
import pytest

from gmbeso import (
    AssumptionError, EsoState, augment, build_model, build_transform_chain,
    continuous_bandwidth_to_eigenvalue, design_eso, eso_step, run_eso, simulate_plant,
)
from gmbeso.eso import closed_loop_is_assigned, repeated_root_coefficients

from .corpus import no_zero_plant, zero_plant
from .oracles import ackermann_gain


def test_bandwidth_mapping():
    assert continuous_bandwidth_to_eigenvalue(1000, 0.02) == pytest.approx(2.0612e-9, rel=1e-4)
    assert continuous_bandwidth_to_eigenvalue(40, 0.02) == pytest.approx(0.4493, rel=1e-4)
    assert continuous_bandwidth_to_eigenvalue(0, 0.02) == 1.0
    with pytest.raises(ValueError):
        continuous_bandwidth_to_eigenvalue(-1, 0.02)


def test_repeated_root_coefficients():
    np.testing.assert_allclose(repeated_root_coefficients(0.5, 3), np.poly([0.5] * 3)[1:])
    np.testing.assert_array_equal(repeated_root_coefficients(0.0, 4), np.zeros(4))


def test_chain_identities_on_sea(sea20):
    aug = augment(sea20)
    ch = build_transform_chain(aug)
    assert ch.m == pytest.approx(3.4847e-4)
    # the disturbance enters the canonical coordinates through the last state only
    np.testing.assert_allclose((ch.Q1 @ ch.S2 @ ch.S1 @ aug.E).ravel(), [0, 0, 0, 0, ch.m],
                               atol=1e-15)
    # the canonical output is the first coordinate
    np.testing.assert_allclose(aug.C @ np.linalg.inv(ch.T), np.eye(1, 5), atol=1e-9)
    # A3 is similar to A with the same characteristic polynomial (z - 1) * plant poly
    np.testing.assert_allclose(ch.T @ aug.A @ np.linalg.inv(ch.T), ch.A3, atol=1e-8)
    np.testing.assert_allclose(ch.poly, np.poly(aug.A), atol=1e-10)


@pytest.mark.parametrize("n", [1, 2, 3, 4, 5, 6])
def test_gain_matches_ackermann(n):
    rng = np.random.default_rng(100 + n)
    for lam in (0.0, 0.3, 0.8):
        m = no_zero_plant(rng, n)
        d = design_eso(m, lam)
        aug = d.augmented
        ref = ackermann_gain(aug.A, aug.C, [lam] * (n + 1))
        np.testing.assert_allclose(d.gain_L, ref, rtol=1e-6, atol=1e-9 * np.abs(ref).max())
        assert closed_loop_is_assigned(d)


def test_sea_design_places_the_cluster(sea20):
    lam = continuous_bandwidth_to_eigenvalue(40, 0.02)
    d = design_eso(sea20, lam)
    assert closed_loop_is_assigned(d)
    np.testing.assert_allclose(np.poly(d.closed_loop)[1:], np.poly([lam] * 5)[1:], atol=1e-6)
    assert d.gain_L[-1, 0] == pytest.approx((1 - lam) ** 5 / 3.4847e-4, rel=1e-12)


def test_deadbeat_closed_loop_is_nilpotent(sea20):
    d = design_eso(sea20, 0.0)
    P = np.linalg.matrix_power(d.closed_loop, 5)
    assert np.abs(P).max() < 1e-8 * np.abs(d.closed_loop).max() ** 5


def test_design_rejects_zeros_and_bad_lambda(sea20, rng):
    with pytest.raises(AssumptionError) as exc:
        design_eso(zero_plant(rng, 3), 0.2)
    assert exc.value.assumption == 2
    unobservable = build_model(np.diag([0.5, 0.5]), [1, 1], [1, 0], [1, 1], 1.0)
    with pytest.raises(AssumptionError) as exc:
        design_eso(unobservable, 0.2)
    assert exc.value.assumption == 1
    for lam in (-0.1, 1.0, 1.5):
        with pytest.raises(ValueError):
            design_eso(sea20, lam)


def test_eso_step_examples():
    m = build_model([[0.5]], [1.0], [1.0], [1.0], 1.0)
    d = design_eso(m, 0.0)
    # A = [[0.5, 1], [0, 1]], C = [1, 0]; deadbeat gain by hand
    np.testing.assert_allclose(d.gain_L.ravel(), [1.5, 1.0])
    s = eso_step(d, EsoState(np.zeros(2), 0), u=0.0, y=0.0)
    np.testing.assert_array_equal(s.xhat, [0.0, 0.0])
    assert s.step_index == 1
    s = eso_step(d, EsoState(np.zeros(2), 0), u=2.0, y=1.0)
    np.testing.assert_allclose(s.xhat, [3.5, 1.0])
    assert s.f_hat == 1.0


def test_run_eso_matches_step_by_step(sea20, rng):
    d = design_eso(sea20, 0.3)
    u, y = rng.normal(size=20), rng.normal(size=20)
    X = run_eso(d, u, y)
    s = EsoState(np.zeros(5), 0)
    for k in range(20):
        np.testing.assert_allclose(X[k], s.xhat, rtol=1e-12, atol=1e-12)
        s = eso_step(d, s, u[k], y[k])


def test_run_eso_is_linear(sea20, rng):
    d = design_eso(sea20, 0.5)
    u1, y1, u2, y2 = (rng.normal(size=30) for _ in range(4))
    lhs = run_eso(d, 2 * u1 - u2, 2 * y1 - y2)
    rhs = 2 * run_eso(d, u1, y1) - run_eso(d, u2, y2)
    np.testing.assert_allclose(lhs, rhs, atol=1e-9 * np.abs(lhs).max())


def test_run_eso_input_checks(sea20):
    d = design_eso(sea20, 0.5)
    with pytest.raises(ValueError):
        run_eso(d, np.zeros(3), np.zeros(4))
    with pytest.raises(ValueError):
        run_eso(d, np.zeros(3), np.zeros(3), initial_xhat=np.zeros(4))


def test_deadbeat_reconstructs_delayed_disturbance(sea20):
    d = design_eso(sea20, 0.0)
    K = 60
    rng = np.random.default_rng(7)
    f = np.cumsum(rng.normal(size=K))
    u = rng.normal(size=K)
    _, y = simulate_plant(sea20, u, f)
    X = run_eso(d, u, y)
    np.testing.assert_allclose(X[6:, -1], f[1:K - 5], atol=1e-7 * np.abs(f).max())


def test_design_to_dict(sea20):
    d = design_eso(sea20, 0.2).to_dict()
    assert d["kind"] == "eso" and len(d["gain_L"]) == 5 and d["n"] == 4
