import numpy as np
import pytest

from metallicgeo.geometry import (
    Chart,
    SingularMetricError,
    TensorField,
    contract,
    inverse_metric,
    lower_index,
    max_abs,
    raise_index,
)


def test_chart_grid_3x3_gives_9_points():
    chart = Chart(dimension=2, bounds=((-1, 1), (-1, 1)), grid=3, margin=0.1)
    pts = chart.sample_points()
    assert pts.shape == (9, 2)
    assert np.all(np.abs(pts) <= 0.9 + 1e-12)


def test_chart_determinism_for_fixed_seed():
    mk = lambda: Chart(dimension=2, bounds=((-1, 1), (-1, 1)), grid=2, n_random=6,
                       seed=42, margin=0.1).sample_points()
    assert np.array_equal(mk(), mk())


def test_chart_named_point_included():
    chart = Chart(dimension=2, bounds=((-1, 1), (-1, 1)), grid=3, margin=0.1,
                  named_points={"origin": (0.0, 0.0)})
    pts = chart.sample_points()
    assert any(np.allclose(p, [0.0, 0.0]) for p in pts)


def test_chart_rejects_odd_dimension():
    with pytest.raises(ValueError):
        Chart(dimension=3, bounds=((-1, 1),) * 3, grid=2, margin=0.1)


def test_chart_rejects_small_sample_budget():
    with pytest.raises(ValueError):
        Chart(dimension=2, bounds=((-1, 1), (-1, 1)), grid=2, n_random=0, margin=0.1)


def test_inverse_metric_identity_and_diagonal():
    assert np.allclose(inverse_metric(np.eye(4)), np.eye(4))
    assert np.allclose(inverse_metric(np.diag([4.0, 4.0])), np.diag([0.25, 0.25]))


def test_inverse_metric_sphere_conformal_origin():
    # 4/(1+r^2)^2 delta at the origin is 4*delta, so the inverse is delta/4
    g = 4.0 * np.eye(2)
    assert np.allclose(inverse_metric(g), 0.25 * np.eye(2))


def test_inverse_metric_singular_names_point():
    with pytest.raises(SingularMetricError) as err:
        inverse_metric(np.zeros((2, 2)), point=(0.5, -0.5))
    assert "0.5" in str(err.value)


def test_contract_trace_identity():
    n = 6
    eye = np.eye(n)
    val, sig = contract(eye, "ud", 0, 1)
    assert val == n and sig == ""


def test_contract_trace_complex_structure_zero():
    J = np.array([[0.0, -1.0], [1.0, 0.0]])
    val, _ = contract(J, "ud", 0, 1)
    assert val == 0.0


def test_contract_symmetric_times_antisymmetric_zero():
    rng = np.random.default_rng(0)
    A = rng.normal(size=(4, 4))
    S = A + A.T
    B = rng.normal(size=(4, 4))
    W = B - B.T
    outer = np.einsum("jt,ab->jtab", S, W)
    once, sig = contract(outer, "dduu", 0, 2)
    twice, _ = contract(once, "du", 0, 1)
    assert abs(twice) < 1e-12


def test_contract_like_slots_need_metric():
    with pytest.raises(ValueError):
        contract(np.eye(2), "dd", 0, 1)
    val, sig = contract(np.eye(2), "dd", 0, 1, metric=np.eye(2))
    assert val == 2.0 and sig == ""


def test_lower_structure_with_identity_metric():
    J = np.array([[0.0, -1.0], [1.0, 0.0]])  # J[h, i]
    lowered, sig = lower_index(J, "ud", 0, np.eye(2))
    # w_im = J_i^t delta_tm: lowered[m, i] arrangement keeps axis order
    assert sig == "dd"
    assert np.allclose(lowered, J)


def test_double_raise_matches_definition():
    rng = np.random.default_rng(1)
    w = rng.normal(size=(3, 3))
    w = w - w.T
    A = rng.normal(size=(3, 3))
    g = A @ A.T + 3 * np.eye(3)
    ginv = np.linalg.inv(g)
    up1, sig1 = raise_index(w, "dd", 0, ginv)
    up2, sig2 = raise_index(up1, "ud", 1, ginv)
    assert sig2 == "uu"
    assert np.allclose(up2, np.einsum("hi,lm,im->hl", ginv, ginv, w))


def test_raise_lower_round_trip_many_random_tensors():
    rng = np.random.default_rng(7)
    for _ in range(120):
        n = int(rng.choice([2, 4, 6]))
        rank = int(rng.integers(1, 4))
        sig = "".join(rng.choice(["u", "d"]) for _ in range(rank))
        T = rng.normal(size=(n,) * rank)
        A = rng.normal(size=(n, n))
        g = A @ A.T + n * np.eye(n)
        ginv = np.linalg.inv(g)
        axis = int(rng.integers(0, rank))
        if sig[axis] == "d":
            up, s2 = raise_index(T, sig, axis, ginv)
            back, s3 = lower_index(up, s2, axis, g)
        else:
            dn, s2 = lower_index(T, sig, axis, g)
            back, s3 = raise_index(dn, s2, axis, ginv)
        assert s3 == sig
        assert max_abs(back - T) < 1e-10


def test_tensorfield_validates_declared_symmetry():
    bad = TensorField(name="bad", sig="dd", fn=lambda p: np.array([[0.0, 1.0], [0.0, 0.0]]),
                      symmetric_pairs=((0, 1),))
    with pytest.raises(Exception):
        bad.validate_on(np.zeros((1, 2)))
