"""
Сквозные проверки свойств операторов, алгоритма Смоляка и норм
на настольных масштабах
"""

import math
from math import comb

import numpy as np
import pytest

from fourier_core import TrigPoly, hyperbolic_cross
from kernels import (
    char_averager,
    dirichlet_kernel,
    modified_dirichlet_kernel,
    shifted_dirichlet_combo,
    solve_shift_coefficients,
    taylor_defect,
)
from operators import QuasiInterpOp, apply_aliasing, apply_sampled, named_operator
from smolyak import level_vectors, smolyak_apply
from spaces import (
    NormFamily,
    NormSpec,
    besov_norm,
    check_cond,
    compat_condition_proxy,
    discrete_lp_quasi_norm,
    smooth_resolution,
)
from testbed import (
    BenchFunction,
    f_lower,
    fit_rate,
    kantorovich_equivalence,
    korobov,
    measure_error,
    phi_j,
    sharpness_table,
)


def _dirichlet_char(d):
    return QuasiInterpOp(dirichlet_kernel(), char_averager(2), d=d, name="D+char")


def _operators(d):
    return [named_operator("I", d=d), named_operator("K", d=d), named_operator("K*", d=d),
            _dirichlet_char(d)]


def _max_diff(a, b):
    return float(np.max(np.abs((a - b).coeffs), initial=0.0))


@pytest.mark.parametrize("d", [1, 2, 3])
def test_sampled_path_agrees_with_aliasing_formula(d, make_poly, rng):
    for op in _operators(d):
        for _ in range(50):
            f = make_poly(d, 24, terms=8)
            j = tuple(int(x) for x in rng.integers(0, 7, size=d))
            exact = apply_aliasing(op, f, j)
            assert _max_diff(apply_sampled(op, f, j), exact) <= 1e-10 * max(exact.l2_norm(), 1.0)


def test_reproduction_on_sampling_sets_and_crosses(rng):
    op = QuasiInterpOp(modified_dirichlet_kernel(2), char_averager(2), d=1, name="D*+char")
    for j in range(11):
        half = (1 << j) >> 1
        for k in range(-half, (1 << j) - half):
            e = TrigPoly.monomial((k,))
            assert _max_diff(apply_sampled(op, e, (j,)), e) <= 1e-12
    op2 = op.with_dimension(2)
    for n in range(2, 9):
        cross = np.array(sorted(hyperbolic_cross(n - 2, 2)))
        t = TrigPoly(2, cross, rng.standard_normal(len(cross)))
        assert _max_diff(smolyak_apply(op2, t, n), t) <= 1e-10


@pytest.mark.parametrize("d", [2, 3])
def test_direct_sum_equals_combination_plan(d, make_poly):
    op = named_operator("K*", d=d)
    f = make_poly(d, 20, terms=16)
    for n in range(9):
        direct = smolyak_apply(op, f, n, mode="direct", path="aliasing")
        combined = smolyak_apply(op, f, n, mode="combination", path="aliasing")
        assert _max_diff(direct, combined) <= 1e-10 * max(combined.l2_norm(), 1.0)


@pytest.mark.parametrize("d", [1, 2])
def test_sharpness_witness(d):
    op = _dirichlet_char(d)
    assert check_cond(op.avg).xi == 1
    for n, c0, _ in sharpness_table(op, range(max(3, d), 13)):
        expected = (2 / math.pi) ** d * comb(n - 1, d - 1)
        assert abs(c0 - expected) <= 1e-10
        assert len(f_lower(n, 1, d).model) == comb(n - 1, d - 1)


def _korobov_records(op, f, ns):
    return [measure_error(op, f, n, 2.0) for n in ns]


@pytest.fixture(scope="module")
def korobov_2d():
    return korobov(2.0, 2, bandwidth=16384)


@pytest.mark.slow
def test_kstar_rate_on_korobov(korobov_2d):
    records = _korobov_records(named_operator("K*", d=2), korobov_2d, range(4, 11))
    fit = fit_rate(records, drop_smallest=0)
    assert 1.3 <= fit.rate <= 1.7


@pytest.mark.slow
def test_sampling_operator_matches_kstar_rate(korobov_2d):
    ns = range(4, 11)
    kstar = fit_rate(_korobov_records(named_operator("K*", d=2), korobov_2d, ns), drop_smallest=0)
    sampling = fit_rate(_korobov_records(named_operator("I", d=2), korobov_2d, ns), drop_smallest=0)
    assert abs(kstar.rate - sampling.rate) <= 0.2


@pytest.mark.parametrize("p", [2.0, math.inf])
def test_kantorovich_error_is_equivalent_to_modulus(p):
    corpus = [
        BenchFunction(model=TrigPoly.monomial((1,)), label="e1"),
        BenchFunction(model=TrigPoly.monomial((3,)), label="e3"),
        korobov(2.0, 1, bandwidth=4096),
    ]
    for f in corpus:
        ratios = [point.ratio for point in kantorovich_equivalence(f, range(3, 11), p)]
        assert all(0.05 <= r <= 20.0 for r in ratios), f.label
    if p == 2.0:
        ratios = [point.ratio for point in kantorovich_equivalence(corpus[2], range(3, 11), p)]
        assert max(ratios) / min(ratios) <= 10.0


def test_condition_checks():
    for sigma in range(1, 6):
        pattern = check_cond(char_averager(sigma))
        assert pattern.xi == sigma - 1
        assert abs(pattern.lam - 2 / math.pi) <= 1e-12
    op = _dirichlet_char(1)
    assert compat_condition_proxy(op, 2.0, 4.0, jmax=12).verdict == "PASS"
    assert compat_condition_proxy(op, 3.0, 4.0, jmax=12).verdict == "FAIL"
    assert taylor_defect(op.kern, op.avg).order == 2
    solved = solve_shift_coefficients(3, 2)
    assert taylor_defect(solved.kernel(), char_averager(2)).order >= 3
    assert taylor_defect(modified_dirichlet_kernel(2), char_averager(2)).order == math.inf
    measured = taylor_defect(shifted_dirichlet_combo(2, [6 / 7, 2 / 7, -1 / 7]), char_averager(2))
    assert measured.order == 2


@pytest.mark.slow
def test_discrete_norm_is_equivalent_to_besov_norm():
    op = named_operator("K*", d=2)
    spec = NormSpec(NormFamily.B, 2.0, 2.0, 1.5)
    phi = smooth_resolution()
    corpus = [phi_j(j, phi) for m in range(9) for j in level_vectors(m, 2)]
    corpus += [korobov(2.0, 2, bandwidth=1024), f_lower(6, 1, 2)]
    ratios = []
    for f in corpus:
        discrete = discrete_lp_quasi_norm(op, f.model, spec, jmax=10).value
        ratios.append(discrete / besov_norm(f.model, spec, phi))
    assert max(ratios) / min(ratios) <= 50.0


@pytest.mark.parametrize("d", [1, 2])
def test_block_norm_asymptotics(d):
    phi = smooth_resolution()
    ratios = [phi_j(j, phi).model.l2_norm() / 2 ** (sum(j) / 2)
              for m in range(13) for j in level_vectors(m, d)]
    assert max(ratios) / min(ratios) <= 4.0
