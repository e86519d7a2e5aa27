import math

import numpy as np
import pytest

from fourier_core import ModelError, ParameterError, PointwiseFunction, TrigPoly
from kernels import char_averager, delta_averager, dirichlet_kernel
from operators import QuasiInterpOp, named_operator
from spaces import (
    NormFamily,
    NormSpec,
    PhiKind,
    averager_norm_Lqj,
    besov_norm,
    best_approx_error_L2,
    best_approx_error_cross_L2,
    block_norms,
    check_cond,
    compat_condition_proxy,
    discrete_lp_quasi_norm,
    dyadic_projection,
    lq_distance,
    lq_norm,
    model_lq_norm,
    modulus2,
    piecewise_linear_resolution,
    smooth_resolution,
    sobolev_norm,
    tl_norm,
)


def test_lq_norm_of_simple_polynomials():
    one = TrigPoly.constant(1)
    cos = TrigPoly(1, [[1], [-1]], [0.5, 0.5])
    for q in (1.0, 2.0, 3.0, math.inf):
        assert lq_norm(one, q) == pytest.approx(1.0)
        assert lq_norm(TrigPoly.monomial((5,)), q) == pytest.approx(1.0)
    assert lq_norm(cos, 2.0) == pytest.approx(math.sqrt(0.5))
    assert lq_norm(cos, 4.0) == pytest.approx((3.0 / 8.0) ** 0.25)
    assert lq_norm(cos, math.inf) == pytest.approx(1.0)
    assert lq_norm(TrigPoly.zero(2), 3.0) == 0.0


def test_lq_distance_and_pointwise_models():
    f = TrigPoly(1, [[1], [3]], [1.0, 1.0])
    g = TrigPoly.monomial((1,))
    assert lq_distance(f, g, 2.0) == pytest.approx(1.0)
    with pytest.raises(ModelError):
        model_lq_norm(PointwiseFunction(1, np.cos), 2.0)


def test_resolution_of_unity_sums_to_one():
    for phi in (smooth_resolution(), piecewise_linear_resolution()):
        k = np.arange(-300, 301)
        total = sum(phi.phi(j, k) for j in range(phi.max_level(300) + 1))
        assert np.allclose(total, 1.0)
    assert smooth_resolution().kind is PhiKind.SMOOTH


def test_dyadic_projections_recompose_polynomial(make_poly):
    f = make_poly(2, 25)
    phi = smooth_resolution()
    levels = phi.max_level(25) + 1
    total = TrigPoly.zero(2)
    for j1 in range(levels):
        for j2 in range(levels):
            total = total + dyadic_projection(f, (j1, j2), phi)
    assert np.max(np.abs((total - f).coeffs), initial=0.0) < 1e-12


def test_besov_norm_of_single_frequency():
    phi = smooth_resolution()
    spec = NormSpec(NormFamily.B, 2.0, math.inf, 1.5)
    assert besov_norm(TrigPoly.constant(1), spec, phi) == pytest.approx(1.0)
    assert besov_norm(TrigPoly.monomial((8,)), spec, phi) == pytest.approx(2 ** 4.5)
    two = TrigPoly.monomial((8, 2))
    assert besov_norm(two, spec, phi) == pytest.approx(2 ** (1.5 * 4))


def test_block_norms_of_single_frequency():
    blocks = block_norms(TrigPoly.monomial((8, 2)), 2.0, smooth_resolution())
    assert blocks.ndim == 2
    assert blocks[3, 1] == pytest.approx(1.0)
    assert np.count_nonzero(blocks > 1e-14) == 1


def test_triebel_lizorkin_norm_of_single_frequency():
    phi = smooth_resolution()
    spec = NormSpec(NormFamily.F, 2.0, 2.0, 1.0)
    assert tl_norm(TrigPoly.monomial((16,)), spec, phi) == pytest.approx(2 ** 4, rel=1e-9)
    assert sobolev_norm(TrigPoly.monomial((4,)), 2.0, 1.0, phi) == pytest.approx(2 ** 2, rel=1e-9)
    with pytest.raises(ParameterError):
        sobolev_norm(TrigPoly.constant(1), 1.0, 1.0, phi)


def test_norm_spec_validation():
    with pytest.raises(ParameterError):
        NormSpec(NormFamily.F, math.inf, 2.0, 1.0)
    with pytest.raises(ParameterError):
        NormSpec(NormFamily.B, 2.0, 0.5, 1.0)
    assert NormSpec("B", 2, 2, 1.0).family is NormFamily.B


@pytest.mark.parametrize("family", ["B", "F"])
def test_discrete_quasi_norm_of_constant(family):
    op = named_operator("K*")
    spec = NormSpec(family, 2.0, 2.0, 1.5)
    record = discrete_lp_quasi_norm(op, TrigPoly.constant(1), spec, jmax=6)
    assert record.value == pytest.approx(1.0)
    assert record.truncation == pytest.approx(0.0, abs=1e-12)
    data = record.to_dict()
    assert data["family"] == family
    assert data["operator"] == "K*"


def test_discrete_quasi_norm_requires_positive_smoothness():
    with pytest.raises(ParameterError):
        discrete_lp_quasi_norm(named_operator("K"), TrigPoly.constant(1),
                               NormSpec(NormFamily.B, 2.0, 2.0, 0.0), jmax=3)


def test_norm_record_serializes_infinity():
    record = discrete_lp_quasi_norm(named_operator("K*"), TrigPoly.constant(1),
                                    NormSpec(NormFamily.B, 2.0, math.inf, 1.0), jmax=3)
    assert record.to_dict()["theta"] == "inf"


@pytest.mark.parametrize("sigma", [1, 2, 3])
def test_averager_norm_of_characteristic_function(sigma):
    avg = char_averager(sigma)
    for j in (0, 3, 6):
        assert averager_norm_Lqj(avg, 1.0, j) == pytest.approx(1.0)
        assert averager_norm_Lqj(avg, 2.0, j) == pytest.approx(2 ** (sigma / 2))
        assert averager_norm_Lqj(avg, math.inf, j) == pytest.approx(2 ** sigma)


def test_averager_norm_rejects_delta():
    with pytest.raises(ModelError):
        averager_norm_Lqj(delta_averager(), 2.0, 3)


@pytest.mark.parametrize("sigma", [1, 2, 3, 4, 5])
def test_check_cond_for_characteristic_averager(sigma):
    pattern = check_cond(char_averager(sigma))
    assert pattern is not None
    assert pattern.xi == sigma - 1
    assert abs(pattern.lam - 2 / math.pi) < 1e-12


def test_check_cond_scaled_and_delta():
    pattern = check_cond(char_averager(2).scaled(2.0))
    assert abs(pattern.lam - 4 / math.pi) < 1e-12
    assert check_cond(delta_averager()) is None


def test_compat_proxy_verdicts():
    op = QuasiInterpOp(dirichlet_kernel(), char_averager(2), name="D+char")
    assert compat_condition_proxy(op, 2.0, 4.0, jmax=12).passed
    report = compat_condition_proxy(op, 3.0, 4.0, jmax=12)
    assert report.verdict == "FAIL"
    assert report.heuristic
    with pytest.raises(ParameterError):
        compat_condition_proxy(op, 0.0, 4.0, jmax=12)


def test_best_approximation_errors():
    f = TrigPoly(1, [[1], [5]], [3.0, 4.0])
    assert best_approx_error_L2(f, 2) == pytest.approx(4.0)
    g = TrigPoly(2, [[1, 1], [4, 4]], [1.0, 2.0])
    assert best_approx_error_cross_L2(g, 3) == pytest.approx(2.0)
    assert best_approx_error_cross_L2(g, 6) == pytest.approx(0.0)


def test_modulus_of_smoothness_of_exponential():
    e = TrigPoly.monomial((1,))
    delta = 0.1
    assert modulus2(e, delta, 2.0) == pytest.approx(2.0 - 2.0 * math.cos(delta))
    with pytest.raises(ParameterError):
        modulus2(TrigPoly.constant(2), delta, 2.0)
