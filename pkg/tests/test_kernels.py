import math

import numpy as np
import pytest

from fourier_core import ParameterError
from kernels import (
    AveragerKind,
    averager_from_spec,
    bump_generator,
    char_averager,
    delta_averager,
    dirichlet_kernel,
    dlvp_kernel,
    kernel_from_spec,
    modified_dirichlet_kernel,
    modified_dlvp_kernel,
    shifted_delta_averager,
    shifted_dirichlet_combo,
    solve_shift_coefficients,
    taylor_defect,
)


def test_dlvp_symbol_values():
    kern = dlvp_kernel(1.0, 2.0)
    assert kern.symbol(0, 0) == pytest.approx(1.0)
    assert kern.symbol(3, 12) == pytest.approx(0.5)
    assert kern.bandwidth(3) == 16
    assert np.all(kern.symbol(3, np.arange(16, 33)) == 0)


def test_dlvp_rejects_bad_parameters():
    with pytest.raises(ParameterError):
        dlvp_kernel(0.5, 0.5)
    with pytest.raises(ParameterError):
        dlvp_kernel(0.0, 1.0)


def test_dirichlet_symbol():
    kern = dirichlet_kernel()
    assert kern.symbol(2, -2) == 1
    assert kern.symbol(2, 2) == 0
    assert kern.symbol(0, 0) == 1
    assert all(kern.symbol(j, 0) == 1 for j in range(12))


def test_modified_dirichlet_symbol():
    kern = modified_dirichlet_kernel(2)
    assert kern.symbol(3, 0) == pytest.approx(1.0)
    assert kern.symbol(3, -4).real == pytest.approx((math.pi / 8) / math.sin(math.pi / 8))
    assert kern.symbol(3, 4) == 0


def test_modified_dirichlet_times_char_is_one_on_sampling_set():
    kern = modified_dirichlet_kernel(2)
    avg = char_averager(2)
    for j in range(13):
        half = (1 << j) >> 1
        k = np.arange(-half, (1 << j) - half)
        assert np.max(np.abs(kern.symbol(j, k) * avg.symbol(j, k) - 1.0)) < 1e-12


def test_kernels_vanish_outside_bandwidth():
    for kern in (dlvp_kernel(0.25, 0.5), modified_dlvp_kernel(0.25, 0.5, 2),
                 dirichlet_kernel(), modified_dirichlet_kernel(1)):
        for j in range(1, 9):
            band = kern.bandwidth(j)
            assert band <= 1 << (j + 1)
            k = np.arange(band, 2 * band + 1)
            assert np.all(kern.symbol(j, k) == 0)
            assert np.all(kern.symbol(j, -k) == 0)


def test_modified_dlvp_plateau_correction_cancels_sinc():
    kern = modified_dlvp_kernel(0.25, 0.5, 2)
    avg = char_averager(2)
    j = 6
    k = np.arange(-16, 17)
    assert np.max(np.abs(kern.symbol(j, k) * avg.symbol(j, k) - 1.0)) < 1e-12


def test_char_averager_symbol():
    avg = char_averager(2)
    assert avg.kind is AveragerKind.FUNCTION
    assert avg.symbol(0, 0) == pytest.approx(1.0)
    assert avg.symbol(0, 2).real == pytest.approx(2 / math.pi)
    # sinc обращается в нуль при j <= u - sigma
    for u in range(3, 10):
        for j in range(0, u - 1):
            assert abs(avg.symbol(j, 1 << u)) < 1e-12
    k = np.arange(-50, 51)
    values = avg.symbol(4, k)
    assert np.allclose(values, values[::-1])
    assert np.all(np.abs(values) <= 1.0)


def test_delta_averagers():
    avg = delta_averager()
    assert avg.kind is AveragerKind.DELTA
    assert np.all(avg.symbol(5, np.arange(-40, 40)) == 1)
    single = shifted_delta_averager([0.0], [1.0])
    assert np.allclose(single.symbol(3, np.arange(-9, 9)), 1.0)
    with pytest.raises(ParameterError):
        shifted_delta_averager([0.0, 1.0], [1.0])


def test_shifted_dirichlet_single_term_is_dirichlet():
    combo = shifted_dirichlet_combo(2, [1.0])
    plain = dirichlet_kernel()
    k = np.arange(-10, 10)
    assert np.allclose(combo.symbol(3, k), plain.symbol(3, k))


def test_shift_solver_low_orders():
    sol2 = solve_shift_coefficients(2, 2)
    assert np.allclose(sol2.a, [1.0, 0.0])
    assert sol2.alpha == pytest.approx(1.0 / 6.0)
    sol3 = solve_shift_coefficients(3, 2)
    assert np.allclose(sol3.a, [5 / 6, 1 / 3, -1 / 6])
    with pytest.raises(ParameterError):
        solve_shift_coefficients(1, 2)


@pytest.mark.parametrize("s", [2, 3])
def test_shift_solver_output_reaches_order(s):
    sol = solve_shift_coefficients(s, 2)
    assert np.sum(sol.a) == pytest.approx(1.0)
    estimate = taylor_defect(sol.kernel(), char_averager(2))
    assert estimate.order is not None
    assert estimate.order >= s


def test_taylor_defect_orders():
    plain = taylor_defect(dirichlet_kernel(), char_averager(2))
    assert plain.order == 2
    assert plain.leading.real == pytest.approx((math.pi / 4) ** 2 / 6, rel=1e-2)
    assert taylor_defect(modified_dirichlet_kernel(2), char_averager(2)).order == math.inf
    assert taylor_defect(dlvp_kernel(0.5, 1.0), delta_averager()).order == math.inf


def test_taylor_defect_of_three_term_coefficients_is_measured():
    combo = shifted_dirichlet_combo(2, [6 / 7, 2 / 7, -1 / 7])
    estimate = taylor_defect(combo, char_averager(2))
    assert estimate.order == 2


def test_specs_build_families():
    assert kernel_from_spec({"kind": "modified_dirichlet", "sigma": 2}).params["sigma"] == 2
    assert kernel_from_spec({"kind": "shifted_dirichlet", "s": 3}).normalized
    avg = averager_from_spec({"kind": "char", "sigma": 1, "scale": 2.0})
    assert avg.symbol(0, 0) == pytest.approx(2.0)
    with pytest.raises(ParameterError):
        kernel_from_spec({"kind": "fejer"})
    with pytest.raises(ParameterError):
        averager_from_spec({"kind": "gauss"})


def test_bump_generator_profile():
    phi0 = bump_generator()
    xi = np.array([0.0, 1.0, -1.0, 1.5, 2.0, 3.0])
    values = phi0(xi)
    assert np.all(values[:3] == 1.0)
    assert 0.0 < values[3] < 1.0
    assert np.all(values[4:] == 0.0)
    fine = np.linspace(-2.5, 2.5, 1001)
    assert np.allclose(phi0(fine), phi0(-fine))
