import cmath
import math

import numpy as np
import pytest

from metallicgeo import zoo
from metallicgeo.geometry import max_abs
from metallicgeo.metallic import (
    MetallicParams,
    VERDICT_HERMITIAN,
    VERDICT_KAHLER,
    VERDICT_NEARLY,
    VERDICT_NONE,
    check_hyperbolic,
    classify,
    conjugate_matrix,
    f_tensor,
    fundamental_form,
    hyperbolicity_quartet,
    j_from_jm_matrix,
    jm_from_j_matrix,
    metallic_mean,
    polynomial_residual,
)

J2 = np.array([[0.0, -1.0], [1.0, 0.0]])


def quadratic_root_oracle(p, q):
    """Independent quadratic-formula root of z^2 - p z + (3/2) q."""
    disc = cmath.sqrt(complex(p * p - 6.0 * q, 0.0))
    r1 = (p + disc) / 2.0
    r2 = (p - disc) / 2.0
    return r1 if r1.imag > 0 else r2


def test_params_admissibility():
    MetallicParams(1.0, 1.0)
    with pytest.raises(ValueError):
        MetallicParams(1.0, 0.0)
    with pytest.raises(ValueError):
        MetallicParams(3.0, 1.0)  # 9 > 6


def test_metallic_mean_golden_case():
    m = metallic_mean(1.0, 1.0)
    assert m.real == pytest.approx(0.5)
    assert m.imag == pytest.approx(math.sqrt(5.0) / 2.0)


def test_metallic_mean_reduces_to_i():
    m = metallic_mean(0.0, 2.0 / 3.0)
    assert m.value == pytest.approx(1j)


def test_metallic_mean_against_quadratic_oracle():
    for p, q in [(2.0, 1.0), (0.5, 0.3), (-1.0, 2.0)]:
        m = metallic_mean(p, q)
        assert m.value == pytest.approx(quadratic_root_oracle(p, q), abs=1e-12)
        assert m.value ** 2 - p * m.value + 1.5 * q == pytest.approx(0.0, abs=1e-12)


def test_jm_from_j_q_two_thirds_is_identity_map():
    params = MetallicParams(0.0, 2.0 / 3.0)
    assert np.allclose(jm_from_j_matrix(J2, params, +1), J2)


def test_jm_from_j_golden_brute_force():
    params = MetallicParams(1.0, 1.0)
    JM = jm_from_j_matrix(J2, params, +1)
    expected = 0.5 * np.eye(2) + (math.sqrt(5.0) / 2.0) * J2
    assert np.allclose(JM, expected)
    # brute-force 2x2 polynomial check
    assert max_abs(JM @ JM - JM + 1.5 * np.eye(2)) < 1e-12


def test_signs_give_mutual_conjugates():
    params = MetallicParams(1.0, 1.0)
    plus = jm_from_j_matrix(J2, params, +1)
    minus = jm_from_j_matrix(J2, params, -1)
    assert np.allclose(minus, conjugate_matrix(plus, params))


def test_j_from_jm_inverts_affine_map():
    params = MetallicParams(1.0, 1.0)
    JM = 0.5 * np.eye(2) + (math.sqrt(5.0) / 2.0) * J2
    assert np.allclose(j_from_jm_matrix(JM, params, +1), J2)


def test_j_from_jm_fixed_point_q_two_thirds():
    params = MetallicParams(0.0, 2.0 / 3.0)
    assert np.allclose(j_from_jm_matrix(J2, params, +1), J2)


def test_round_trip_random_structures():
    rng = np.random.default_rng(3)
    for _ in range(100):
        k = int(rng.choice([1, 2, 3]))
        n = 2 * k
        q = float(rng.uniform(0.1, 4.0))
        p = float(rng.uniform(-1, 1)) * 0.95 * math.sqrt(6.0 * q)
        params = MetallicParams(p, q)
        Q, _ = np.linalg.qr(rng.normal(size=(n, n)))
        Jstd = np.kron(np.eye(k), J2)
        J = Q @ Jstd @ Q.T
        JM = jm_from_j_matrix(J, params, +1)
        assert polynomial_residual(JM, params) < 1e-12
        back = j_from_jm_matrix(JM, params, +1)
        assert max_abs(back - J) < 1e-12


def test_conjugate_involution_and_product():
    params = MetallicParams(1.0, 1.0)
    JM = jm_from_j_matrix(J2, params, +1)
    hat = conjugate_matrix(JM, params)
    assert np.allclose(conjugate_matrix(hat, params), JM)  # involution
    assert np.allclose(JM @ hat, 1.5 * np.eye(2))          # (3/2) q I with q = 1
    assert np.allclose(hat @ JM, 1.5 * np.eye(2))
    assert polynomial_residual(hat, params) < 1e-12


def test_check_hyperbolic_flat_skew_case():
    fx = zoo.get("flat-k1")
    res = check_hyperbolic(fx.bundle)
    assert res["direct"] < 1e-12 and res["derived"] < 1e-12
    assert res["vanish_together"]


def test_check_hyperbolic_p_nonzero_fails_with_p_scale():
    # flat bundle with p = 1: the symmetric part of w equals p * g
    from metallicgeo.zoo import fixture_flat

    fx = fixture_flat(1, q=1.0, p=1.0)
    res = check_hyperbolic(fx.bundle)
    assert res["direct"] == pytest.approx(1.0, abs=1e-12)  # p * delta diagonal
    assert fx.bundle.classification().verdict == VERDICT_NONE


def test_check_hyperbolic_s6():
    res = check_hyperbolic(zoo.get("s6").bundle)
    assert res["direct"] < 1e-8 and res["derived"] < 1e-8


def test_hyperbolicity_quartet_vanishes_for_p_zero():
    quartet = hyperbolicity_quartet(zoo.get("s2").bundle)
    assert set(quartet) == {"J", "J-conjugate", "JM", "JM-conjugate"}
    assert all(v < 1e-8 for v in quartet.values())


def test_fundamental_form_flat():
    bundle = zoo.get("flat-k1").bundle
    w, skew = fundamental_form(bundle, np.array([0.2, 0.3]))
    assert skew < 1e-12
    # w(e0, e1) = g(J e0, e1) = +1 for the standard rotation structure
    assert w[0, 1] == pytest.approx(1.0)
    assert np.allclose(w, J2.T)  # w[i, m] = (J_M)_i^t delta_tm lays out J transposed


def test_fundamental_form_skew_on_random_vectors_s6():
    bundle = zoo.get("s6").bundle
    rng = np.random.default_rng(0)
    w, _ = fundamental_form(bundle, np.zeros(6))
    for _ in range(20):
        x = rng.normal(size=6)
        assert abs(x @ w @ x) < 1e-8


def test_fundamental_form_index_round_trip():
    bundle = zoo.get("s6").bundle
    ctx = bundle.context(np.zeros(6))
    up = np.einsum("hi,lm,im->hl", ctx.ginv, ctx.ginv, ctx.omega)
    back = np.einsum("hl,hi,lm->im", up, ctx.g, ctx.g)
    assert max_abs(back - ctx.omega) < 1e-10


def test_f_tensor_zero_on_flat():
    bundle = zoo.get("flat-k2").bundle
    assert max_abs(f_tensor(bundle, np.array([0.1, 0.2, -0.3, 0.4]))) < 1e-12


def test_f_tensor_skew_and_matches_cov_omega_s2():
    bundle = zoo.get("s2").bundle
    pt = np.array([0.4, -0.2])
    F = f_tensor(bundle, pt)
    ctx = bundle.context(pt)
    assert max_abs(F + np.einsum("ijk->ikj", F)) < 1e-5
    assert max_abs(F - ctx.cov_omega) < 1e-5


def test_f_tensor_vs_cov_omega_two_paths_s6():
    bundle = zoo.get("s6").bundle
    ctx = bundle.context(np.zeros(6))
    assert max_abs(ctx.F - ctx.cov_omega) / max(1.0, max_abs(ctx.F)) < 1e-5
    assert max_abs(ctx.F) > 0.1


def test_classify_verdicts():
    assert zoo.get("flat-k1").bundle.classification().verdict == VERDICT_KAHLER
    assert zoo.get("s6").bundle.classification().verdict == VERDICT_NEARLY
    negative = zoo.get("negative").bundle.classification()
    assert negative.verdict == VERDICT_HERMITIAN
    assert negative.residuals["max_domega"] > 1e-2
    assert not negative.nearly


def test_classify_skewness_equals_direct_residual():
    cls = zoo.get("negative").bundle.classification()
    assert cls.residuals["omega_skewness"] == cls.residuals["hyperbolic_direct"]


def test_classify_parallel_equivalence_flag():
    for name in ("flat-k1", "torus", "s2", "s6", "negative"):
        assert zoo.get(name).bundle.classification().theorem_dN_equiv_covJ, name
