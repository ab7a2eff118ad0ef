import numpy as np
import pytest

from gmbeso import (
    build_canonical_fb, build_model, build_normal_form, design_eso, design_zd_eso,
    has_no_invariant_zeros, run_eso, simulate_plant, total_disturbance_fa, total_disturbance_fb,
)
from gmbeso.system_model import ModelError
from gmbeso.zero_dynamics import (
    chain_model, feedthrough_block, simulate_canonical, simulate_normal_form, stack_future,
)

from .corpus import no_zero_plant, relative_degree_plant


def test_stack_future():
    d = np.arange(10.0)
    np.testing.assert_array_equal(stack_future(d, 2, 3), [2, 3, 4])
    d2 = np.arange(12.0).reshape(6, 2)
    np.testing.assert_array_equal(stack_future(d2, 1, 2), [2, 3, 4, 5])
    with pytest.raises(ValueError):
        stack_future(d, 8, 3)


def test_feedthrough_block_shape_and_entries(rng):
    A, C, D = rng.normal(size=(3, 3)), rng.normal(size=(1, 3)), rng.normal(size=(3, 2))
    M = feedthrough_block(A, C, D, 3)
    assert M.shape == (3, 4)
    np.testing.assert_array_equal(M[0], 0.0)
    np.testing.assert_allclose(M[2, :2], (C @ A @ D).ravel())
    np.testing.assert_allclose(M[2, 2:], (C @ D).ravel())


def test_normal_form_of_a_relative_degree_two_plant(rng):
    p = relative_degree_plant(rng, 3, 2, q=1)
    nf = build_normal_form(p)
    assert nf.r == 2 and nf.m_dim == 1 and nf.Phi.shape == (1, 3)
    np.testing.assert_allclose(nf.Phi @ p.B0, 0.0, atol=1e-12)
    np.testing.assert_allclose(nf.Phi @ p.C0.T, 0.0, atol=1e-12)
    assert nf.b0 == pytest.approx((p.C0 @ p.A0 @ p.B0).item())
    np.testing.assert_allclose(nf.T1 @ np.linalg.inv(nf.T1), np.eye(3), atol=1e-10)


def test_full_relative_degree_has_no_zero_dynamics(rng):
    p = relative_degree_plant(rng, 3, 3, q=1)
    nf = build_normal_form(p)
    assert nf.m_dim == 0 and nf.Phi.shape == (0, 3)
    d = rng.normal(size=20)
    fa = total_disturbance_fa(nf, np.zeros((20, 0)), d)
    fb = total_disturbance_fb(build_canonical_fb(p), d)
    # without zero dynamics both definitions coincide
    np.testing.assert_allclose(fa[: fb.size], fb, atol=1e-12)


def test_normal_form_needs_a_relative_degree():
    p = build_model(np.eye(2, k=1) * 0.5 + np.eye(2) * 0.1, [0, 0], [1, 1], [1, 0], 1.0)
    with pytest.raises(ModelError):
        build_normal_form(p)


def test_fb_when_the_disturbance_map_meets_the_markov_condition(rng):
    # a disturbance map that already satisfies the Markov condition gives f_b = m d
    p = no_zero_plant(rng, 4)
    m = (p.C0 @ np.linalg.matrix_power(p.A0, 3) @ p.E0).item()
    can = build_canonical_fb(p)
    d = rng.normal(size=30)
    fb = total_disturbance_fb(can, d)
    np.testing.assert_allclose(fb, m * d[: fb.size], atol=1e-10)
    np.testing.assert_allclose(can.model_fb.E0 * m, p.E0, atol=1e-10)


def test_fb_with_two_disturbance_channels_by_hand():
    # A0 = shift, C0 = e1: T2 = I, and f_b is what lands in the last canonical state
    A0 = np.eye(3, k=1)
    D0 = np.array([[1.0, 0.0], [0.0, 2.0], [0.0, 0.0]])
    p = build_model(A0, [0, 0, 1], D0, [1, 0, 0], 1.0)
    can = build_canonical_fb(p)
    np.testing.assert_allclose(can.T2, np.eye(3))
    d = np.arange(12.0).reshape(6, 2)
    fb = total_disturbance_fb(can, d)
    # y(k+3) = x3(k) + u(k) + D0-row sums shifted: f_b(k) = d1(k+2) + 2 d2(k+1)
    expected = d[2:6, 0] + 2 * d[1:5, 1]
    np.testing.assert_allclose(fb, expected)


@pytest.mark.parametrize("n, r, q", [(3, 1, 1), (3, 2, 2), (4, 2, 1), (5, 3, 2), (4, 4, 1)])
def test_three_simulations_share_the_output(n, r, q):
    rng = np.random.default_rng(n * 10 + r + q)
    p = relative_degree_plant(rng, n, r, q)
    nf, can = build_normal_form(p), build_canonical_fb(p)
    K = 60
    u, d, x0 = rng.normal(size=K), rng.normal(size=(K, q)), rng.normal(size=n)
    _, y = simulate_plant(p, u, d, x0)
    _, _, yn = simulate_normal_form(nf, u, d, x0)
    _, yc, fb = simulate_canonical(can, u, d, x0)
    np.testing.assert_allclose(yn, y[: yn.size], atol=1e-9)
    np.testing.assert_allclose(yc, y[: yc.size], atol=1e-9)


def test_fb_does_not_depend_on_the_initial_state(rng):
    p = relative_degree_plant(rng, 4, 2, 1)
    can = build_canonical_fb(p)
    d = rng.normal(size=30)
    u = rng.normal(size=30)
    _, _, fb1 = simulate_canonical(can, u, d, rng.normal(size=4))
    _, _, fb2 = simulate_canonical(can, u, d, 100 * rng.normal(size=4))
    np.testing.assert_array_equal(fb1, fb2)


def test_fb_model_always_satisfies_the_markov_condition():
    rng = np.random.default_rng(9)
    for n in range(1, 7):
        for r in range(1, n + 1):
            p = relative_degree_plant(rng, n, r, 2)
            assert has_no_invariant_zeros(build_canonical_fb(p).model_fb)


def test_zd_eso_equals_plain_eso_without_zero_dynamics(rng):
    p = relative_degree_plant(rng, 3, 3, 1)
    b0 = (p.C0 @ np.linalg.matrix_power(p.A0, 2) @ p.B0).item()
    plain = p.with_disturbance_map(p.B0 / b0)
    zd = design_zd_eso(build_canonical_fb(plain), 0.3)
    np.testing.assert_allclose(zd.gain_L, design_eso(plain, 0.3).gain_L, rtol=1e-9)


def test_zd_eso_tracks_fb_and_conventional_eso_tracks_fa():
    rng = np.random.default_rng(21)
    p = relative_degree_plant(rng, 4, 2, 1)
    nf, can = build_normal_form(p), build_canonical_fb(p)
    K = 50
    u, d, x0 = rng.normal(size=K), rng.normal(size=K), rng.normal(size=4)
    _, eta, y = simulate_normal_form(nf, u, d, x0)
    fa = total_disturbance_fa(nf, eta, d)
    Xa = run_eso(design_eso(chain_model(nf), 0.0), u[: y.size], y)
    # deadbeat: the chain ESO reproduces f_a three samples late
    np.testing.assert_allclose(Xa[4:, -1], fa[1:y.size - 3], atol=1e-8)
    _, yc, fb = simulate_canonical(can, u, d, x0)
    Xb = run_eso(design_zd_eso(can, 0.0), u[: yc.size], yc)
    np.testing.assert_allclose(Xb[6:, -1], fb[1:yc.size - 5], atol=1e-8)
