import math

import numpy as np
import pytest

from fourier_core import (
    DyadicGrid,
    ModelError,
    ParameterError,
    PointwiseFunction,
    SpectralFunction,
    TrigPoly,
    eval_on_grid,
    tensor_product,
)
from kernels import char_averager, dirichlet_kernel, modified_dirichlet_kernel
from operators import (
    QuasiInterpOp,
    apply,
    apply_aliasing,
    apply_sampled,
    convolve,
    kantorovich_avg,
    level_operator,
    named_operator,
)


def _dirichlet_char(d=1, sigma=2):
    return QuasiInterpOp(dirichlet_kernel(), char_averager(sigma), d=d, name="D+char")


def _reproducing(d=1, sigma=2):
    return QuasiInterpOp(modified_dirichlet_kernel(sigma), char_averager(sigma), d=d, name="D*+char")


def _max_diff(a, b):
    diff = a - b
    return float(np.max(np.abs(diff.coeffs), initial=0.0))


def test_constant_is_preserved():
    one = TrigPoly.constant(1)
    for name in ("I", "K", "K*", "V"):
        op = named_operator(name)
        for j in range(0, 6):
            assert _max_diff(apply_aliasing(op, one, (j,)), one) < 1e-12


def test_single_frequency_dirichlet_char():
    op = _dirichlet_char()
    f = TrigPoly.monomial((1,))
    for j in range(2, 7):
        out = apply_aliasing(op, f, (j,))
        assert out.to_dict() == pytest.approx({(1,): np.sinc(1 / 2 ** (j + 2))})


def test_zeroth_coefficient_of_power_of_two_frequency():
    op = _dirichlet_char()
    for u in range(2, 7):
        f = TrigPoly.monomial((1 << u,))
        for j in range(0, 8):
            c0 = apply_aliasing(op, f, (j,)).coeff((0,))
            expected = op.avg.symbol(j, 1 << u) if j <= u else 0.0
            assert abs(c0 - expected) < 1e-12


@pytest.mark.parametrize("name", ["I", "K", "K*"])
@pytest.mark.parametrize("d", [1, 2, 3])
def test_sampled_path_matches_aliasing_path(name, d, make_poly):
    op = named_operator(name, d=d)
    for _ in range(5):
        f = make_poly(d, 20)
        j = tuple(int(x) for x in np.random.default_rng(d).integers(0, 5, size=d))
        exact = apply_aliasing(op, f, j)
        sampled = apply_sampled(op, f, j)
        scale = max(exact.l2_norm(), 1.0)
        assert _max_diff(exact, sampled) <= 1e-10 * scale


def test_reproduction_on_sampling_set(rng):
    op = _reproducing()
    for j in range(0, 11):
        half = (1 << j) >> 1
        k = np.arange(-half, (1 << j) - half)
        t = TrigPoly(1, k[:, None], rng.standard_normal(len(k)))
        assert _max_diff(apply_sampled(op, t, (j,)), t) < 1e-12


def test_tensor_input_gives_product_of_univariate_outputs():
    op2 = _dirichlet_char(d=2)
    op1 = op2.univariate()
    f = TrigPoly.monomial((1, 1))
    e = TrigPoly.monomial((1,))
    expected = tensor_product([apply_aliasing(op1, e, (3,)), apply_aliasing(op1, e, (2,))])
    assert _max_diff(apply_sampled(op2, f, (3, 2)), expected) < 1e-12


def test_linearity(make_poly):
    op = named_operator("K", d=2)
    f, g = make_poly(2, 12), make_poly(2, 12)
    lhs = apply_sampled(op, 2.0 * f + (-3.0) * g, (3, 2))
    rhs = 2.0 * apply_sampled(op, f, (3, 2)) - 3.0 * apply_sampled(op, g, (3, 2))
    assert _max_diff(lhs, rhs) < 1e-10


def test_output_within_kernel_bandwidth(make_poly):
    op = named_operator("I", d=2)
    out = apply_aliasing(op, make_poly(2, 40), (4, 3))
    band = (op.kern.bandwidth(4), op.kern.bandwidth(3))
    assert all(b < limit for b, limit in zip(out.bandwidth(), band))


def test_convolution_operator_multiplies_by_generator():
    op = named_operator("V")
    f = TrigPoly(1, [[1], [6], [20]], [1.0, 1.0, 1.0])
    out = apply(op, f, (5,))
    assert out.to_dict() == pytest.approx(
        {(1,): op.kern.symbol(5, 1), (6,): op.kern.symbol(5, 6)})
    assert apply_sampled(op, f, (5,)).to_dict() == out.to_dict()
    assert convolve(op, f, (5,)).to_dict() == out.to_dict()


def test_kstar_reproduces_plateau_frequencies():
    op = named_operator("K*")
    j = 6
    t = TrigPoly(1, np.arange(-16, 17)[:, None], np.ones(33))
    assert _max_diff(apply_aliasing(op, t, (j,)), t) < 1e-12


def test_sampling_operator_interpolates_with_dirichlet(make_poly):
    op = QuasiInterpOp(dirichlet_kernel(), named_operator("I").avg, name="I(D)")
    f = make_poly(1, 30)
    out = apply_aliasing(op, f, (4,))
    grid = DyadicGrid((4,))
    assert np.allclose(eval_on_grid(out, grid), eval_on_grid(f, grid))


def test_kantorovich_average():
    one = TrigPoly.constant(1)
    assert kantorovich_avg(one, 3, 2, 0.7) == pytest.approx(1.0)
    e = TrigPoly.monomial((1,))
    expected = math.sin(math.pi / 4) / (math.pi / 4)
    assert kantorovich_avg(e, 0, 2, 0.0).real == pytest.approx(expected)
    pointwise = PointwiseFunction(1, lambda x: np.exp(1j * x[..., 0]))
    assert kantorovich_avg(pointwise, 0, 2, 0.0).real == pytest.approx(expected, abs=1e-9)


def test_kantorovich_average_of_step_is_zero_at_origin():
    step = PointwiseFunction(1, lambda x: np.sign(np.sin(x[..., 0])))
    assert abs(kantorovich_avg(step, 2, 2, 0.0)) < 1e-9


def test_pointwise_sampling_matches_exact_model(make_poly):
    f = make_poly(2, 6)
    pointwise = PointwiseFunction(2, f.evaluate)
    for name in ("I", "K"):
        op = named_operator(name, d=2)
        exact = apply_aliasing(op, f, (3, 3))
        assert _max_diff(apply_sampled(op, pointwise, (3, 3)), exact) < 1e-8


def test_pointwise_requires_quadrature_for_function_averager():
    op = QuasiInterpOp(dirichlet_kernel(), char_averager(2), name="no quadrature")
    f = PointwiseFunction(1, lambda x: np.cos(x[..., 0]))
    with pytest.raises(ModelError):
        apply_sampled(op, f, (3,))
    with pytest.raises(ModelError):
        apply_aliasing(op, f, (3,))


def test_spectral_without_bandwidth_is_rejected():
    f = SpectralFunction(d=1, bandwidth=None, factors=(lambda k: np.ones(len(k)),))
    with pytest.raises(ModelError):
        apply_aliasing(named_operator("K"), f, (3,))


def test_separable_spectral_function_matches_explicit_polynomial():
    f = SpectralFunction(d=2, bandwidth=40, factors=(lambda k: 1.0 / (1.0 + np.abs(k)) ** 2,) * 2)
    op = named_operator("K*", d=2)
    explicit = f.to_trigpoly()
    assert _max_diff(apply_sampled(op, f, (4, 2)), apply_aliasing(op, explicit, (4, 2))) < 1e-12


def test_level_operator_negative_level_is_zero():
    op = named_operator("K", d=2)
    assert level_operator(op, TrigPoly.constant(2), (-1, 3)).is_zero


def test_unknown_names_and_paths():
    with pytest.raises(ParameterError):
        named_operator("Z")
    with pytest.raises(ParameterError):
        apply(named_operator("K"), TrigPoly.constant(1), (2,), path="fast")
