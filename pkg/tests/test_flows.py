import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from vortexlab.errors import UnknownKind
from vortexlab.flows import (
    expansion_term, flow_metrics, full_expansion, make_flow, strain_rates, tensor_norm,
)

CATALOG = [
    ("linear_strain", dict(gamma=0.7)),
    ("rotating_strain", dict(gamma=0.7, omega_r=0.3)),
    ("cellular", dict(U=1.3, Lc=0.8)),
]


def numeric_derivative(flow, x, k, h=1e-3):
    """Central-difference derivative tensor built recursively from order k-1."""
    if k == 0:
        return flow.velocity(x)
    out = []
    for j in range(2):
        e = np.zeros(2)
        e[j] = h
        out.append((numeric_derivative(flow, x + e, k - 1, h) - numeric_derivative(flow, x - e, k - 1, h)) / (2 * h))
    return np.stack(out, axis=-1)


def test_linear_strain_characteristic_time():
    flow = make_flow("linear_strain", gamma=2.5)
    assert flow.T0 == pytest.approx(1 / 2.5, rel=1e-12)
    m = flow_metrics(flow, (-1, 1, -1, 1), times=np.linspace(0, 1, 16))
    assert m.T0_est == pytest.approx(1 / 2.5, rel=1e-12)


def test_linear_strain_rates():
    sr = strain_rates(make_flow("linear_strain", gamma=0.8), [0.3, -0.2])
    assert sr.a == pytest.approx(-0.4) and sr.b == 0.0 and sr.c == 0.0


def test_rotating_strain_rates():
    sr = strain_rates(make_flow("rotating_strain", gamma=0.8, omega_r=0.5), [1.0, 2.0])
    assert sr.c == pytest.approx(0.25) and sr.a == pytest.approx(-0.4) and sr.b == pytest.approx(0.0)


def test_rotating_strain_without_rotation_is_linear_strain():
    x = np.random.default_rng(0).normal(size=(20, 2))
    a = make_flow("rotating_strain", gamma=0.9, omega_r=0.0)
    b = make_flow("linear_strain", gamma=0.9)
    for k in range(5):
        assert np.array_equal(a.derivative(x, 0.0, k), b.derivative(x, 0.0, k))


def test_pure_rotation_has_no_strain():
    flow = make_flow("rotating_strain", gamma=1e-300, omega_r=1.0)
    sr = strain_rates(flow, [0.0, 0.0])
    assert abs(sr.a) < 1e-200 and sr.b == 0.0


def test_cellular_at_origin():
    flow = make_flow("cellular", U=2.0, Lc=1.5)
    assert np.allclose(flow.velocity(np.zeros(2)), 0.0)
    assert np.allclose(flow.velocity(np.array([0.0, 1.5 * np.pi / 2])), [0.0, 2.0])
    j = flow.jacobian(np.zeros(2))
    assert j[0, 0] + j[1, 1] == 0.0


@pytest.mark.parametrize("kind,params", CATALOG)
def test_closed_form_derivatives_match_central_differences(kind, params):
    flow = make_flow(kind, **params)
    x = np.array([0.37, -0.52])
    for k in range(1, 5):
        exact = flow.derivative(x, 0.0, k)
        approx = numeric_derivative(flow, x, k, h=1e-2 if k > 2 else 1e-4)
        scale = max(np.max(np.abs(exact)), 1.0)
        assert np.max(np.abs(exact - approx)) <= 1e-3 * scale


@pytest.mark.parametrize("kind,params", CATALOG)
def test_divergence_free_at_random_points(kind, params):
    flow = make_flow(kind, **params)
    x = np.random.default_rng(1).uniform(-3, 3, size=(100, 2))
    h = 1e-6
    div = ((flow.velocity(x + [h, 0])[:, 0] - flow.velocity(x - [h, 0])[:, 0])
           + (flow.velocity(x + [0, h])[:, 1] - flow.velocity(x - [0, h])[:, 1])) / (2 * h)
    assert np.max(np.abs(div)) <= 1e-6 * (1 / flow.T0)
    j = flow.jacobian(x)
    assert np.max(np.abs(j[:, 0, 0] + j[:, 1, 1])) <= 1e-10


@pytest.mark.parametrize("kind,params", CATALOG)
def test_strain_rates_bounded_by_characteristic_time(kind, params):
    flow = make_flow(kind, **params)
    x = np.random.default_rng(2).uniform(-3, 3, size=(200, 2))
    norms = tensor_norm(flow.jacobian(x), 1)
    assert np.max(norms) <= (1 / flow.T0) * (1 + 1e-6)
    for p in x[:20]:
        sr = strain_rates(flow, p)
        assert abs(sr.a) <= 1 / flow.T0 and abs(sr.b) <= 1 / flow.T0


def test_unknown_kind():
    with pytest.raises(UnknownKind):
        make_flow("hurricane")


def test_nonpositive_parameters_rejected():
    with pytest.raises(ValueError):
        make_flow("linear_strain", gamma=-1.0)


def test_zero_flow_metrics():
    m = flow_metrics(make_flow("zero"), (-1, 1, -1, 1))
    assert m.T0_est == np.inf and m.K_est == 0.0


def test_cellular_metrics_match_hand_bound():
    u, lc, circ = 1.3, 0.8, 0.5
    flow = make_flow("cellular", U=u, Lc=lc)
    m = flow_metrics(flow, (0, 2 * np.pi * lc, 0, 2 * np.pi * lc), times=np.linspace(0, 1, 16),
                     gamma_circ=circ)
    t0 = lc / (2 * u)
    d = np.sqrt(circ * t0)
    hand = (t0 * u / d) * sum((2 * d / lc) ** k for k in range(5))
    assert m.T0_est == pytest.approx(t0, rel=1e-12)
    assert m.K_est == pytest.approx(hand, rel=1e-12)


def test_linear_strain_second_order_term():
    flow = make_flow("linear_strain", gamma=3.0)
    e2 = expansion_term(flow, [0.0, 0.0], 0.0, 2, np.array([1.0, 0.0]), T0=flow.T0, d=1.0)
    assert np.allclose(e2, [-0.5, 0.0])


def test_linear_strain_higher_terms_vanish():
    flow = make_flow("linear_strain", gamma=3.0)
    xi = np.random.default_rng(3).normal(size=(10, 2))
    for k in (3, 4):
        assert not np.any(expansion_term(flow, [0.2, 0.1], 0.0, k, xi, T0=1.0, d=1.0))


def test_hatted_third_order_at_origin():
    flow = make_flow("cellular", U=1.0, Lc=1.0)
    z = np.array([0.4, 0.9])
    val = expansion_term(flow, z, 0.0, 3, np.zeros(2), T0=0.5, d=0.7, hatted=True)
    assert np.allclose(val, -0.5 * 0.7 * flow.laplacian(z))
    assert np.allclose(flow.laplacian(z), -2 * flow.velocity(z))
    assert not np.any(expansion_term(flow, z, 0.0, 1, np.ones(2), 1.0, 1.0, hatted=True))


def test_second_order_term_matches_strain_decomposition():
    flow = make_flow("rotating_strain", gamma=0.8, omega_r=0.3)
    sr = strain_rates(flow, [0, 0])
    th = np.linspace(0, 2 * np.pi, 7)
    xi = np.stack([np.cos(th), np.sin(th)], axis=-1)
    e2 = expansion_term(flow, [0, 0], 0.0, 2, xi, T0=flow.T0, d=1.0)
    # radial part of E2 is T0 (a cos 2theta + b sin 2theta) |xi|
    radial = np.sum(e2 * xi, axis=-1)
    assert np.allclose(radial, flow.T0 * (sr.a * np.cos(2 * th) + sr.b * np.sin(2 * th)))


@settings(max_examples=25, deadline=None)
@given(st.sampled_from([2.0, 3.0]), st.integers(2, 4),
       st.floats(-3, 3), st.floats(-3, 3))
def test_expansion_terms_are_homogeneous(lam, k, x1, x2):
    flow = make_flow("cellular", U=1.1, Lc=0.9)
    z = np.array([0.3, -0.2])
    xi = np.array([x1, x2])
    a = expansion_term(flow, z, 0.0, k, lam * xi, T0=0.4, d=0.6)
    b = lam ** (k - 1) * expansion_term(flow, z, 0.0, k, xi, T0=0.4, d=0.6)
    assert np.allclose(a, b, rtol=1e-13, atol=1e-13)


def test_taylor_remainder_fifth_order():
    flow = make_flow("cellular", U=1.0, Lc=1.0)
    z = np.array([0.5, 0.3])
    zp = flow.velocity(z) + np.array([0.01, -0.02])
    T0, d = flow.T0, 0.8
    rng = np.random.default_rng(4)
    xi = rng.uniform(-1, 1, size=(400, 2))
    xi *= (5 * rng.uniform(0, 1, size=(400, 1))) / np.linalg.norm(xi, axis=1, keepdims=True)
    sup4 = flow.sup_norm(4)
    rems = []
    for eps in (0.1, 0.05, 0.025):
        full = full_expansion(flow, z, zp, 0.0, eps, xi, T0, d)
        series = sum(eps ** k * expansion_term(flow, z, 0.0, k, xi, T0, d, zprime=zp) for k in range(1, 5))
        rem = np.linalg.norm(full - series, axis=-1)
        bound = eps ** 5 / 24 * T0 * d ** 3 * sup4 * np.linalg.norm(xi, axis=-1) ** 4
        assert np.all(rem <= bound * (1 + 1e-9) + 1e-15)
        rems.append(np.max(rem))
    slope = np.polyfit(np.log([0.1, 0.05, 0.025]), np.log(rems), 1)[0]
    assert abs(slope - 5) <= 0.3
