import math

import numpy as np
import pytest

from fourier_core import ParameterError
from kernels import char_averager, dirichlet_kernel
from operators import QuasiInterpOp, named_operator
from spaces import smooth_resolution
from testbed import (
    CSV_COLUMNS,
    BenchFunction,
    ErrorRecord,
    RateFitError,
    exact_norm,
    f_lower,
    f_lower_for,
    fit_rate,
    kantorovich_equivalence,
    korobov,
    measure_error,
    phi_j,
    predicted_rate,
    random_trig_poly,
    sharpness_table,
    step_signal,
)


def _record(n, error, tail=0.0, q=2.0):
    return ErrorRecord(label="f", op="K*", d=2, n=n, q=q, error=error, dof=0, tail=tail,
                       wallclock_ms=0.0)


def test_korobov_tail_and_energy():
    f = korobov(1.0, 1, bandwidth=64)
    direct = 2.0 * sum(1.0 / k ** 2 for k in range(65, 200000))
    assert f.tail ** 2 == pytest.approx(direct, rel=1e-3)
    total = 1.0 + 2.0 * math.pi ** 2 / 6.0
    assert f.model.norm_sq() + f.tail ** 2 == pytest.approx(total, rel=1e-10)
    f2 = korobov(2.0, 2, bandwidth=32)
    total2 = (1.0 + 2.0 * math.pi ** 4 / 90.0) ** 2
    assert f2.model.norm_sq() + f2.tail ** 2 == pytest.approx(total2, rel=1e-10)
    with pytest.raises(ParameterError):
        korobov(0.5, 1)


def test_step_signal_energy_is_one():
    for d in (1, 2):
        f = step_signal(d, bandwidth=255)
        assert f.model.norm_sq() + f.tail ** 2 == pytest.approx(1.0, rel=1e-10)


def test_f_lower_structure():
    f = f_lower(6, 1, 2)
    assert len(f.model) == 5
    assert all(int(k).bit_count() == 1 for k in f.model.freqs.reshape(-1))
    assert np.all(f.model.freqs >= 4)
    with pytest.raises(ParameterError):
        f_lower(1, 1, 2)
    assert f_lower_for(char_averager(3), 4, 1).model.freqs[0, 0] == 1 << 6


def test_phi_j_is_a_dyadic_block():
    f = phi_j((2, 3), smooth_resolution())
    assert f.d == 2
    band = f.model.bandwidth()
    assert band[0] < 8 and band[1] < 16


def test_random_trig_poly_is_seeded():
    a = random_trig_poly(2, 8, np.random.default_rng(7))
    b = random_trig_poly(2, 8, np.random.default_rng(7))
    assert a.to_dict() == b.to_dict()
    assert max(a.bandwidth()) <= 8


def test_predicted_rates():
    quasi = predicted_rate("quasi", 2.0, 2.0, math.inf, 1.5, 2)
    assert quasi.rate == 1.5
    assert quasi.log_power == 1.0
    at_inf = predicted_rate("quasi", 2.0, math.inf, 2.0, 1.5, 3)
    assert at_inf.rate == pytest.approx(1.0)
    assert at_inf.log_power == pytest.approx(1.0)
    between = predicted_rate("quasi", 2.0, 4.0, math.inf, 1.5, 2, family="F")
    assert between.rate == pytest.approx(1.25)
    assert between.log_power == 0.0
    conv = predicted_rate("convolution", 2.0, 2.0, 2.0, 1.5, 3)
    assert conv.log_power == pytest.approx(0.0)
    with pytest.raises(ParameterError):
        predicted_rate("sampling", 2.0, 4.0, 2.0, 1.5, 2)
    with pytest.raises(ParameterError):
        predicted_rate("spline", 2.0, 2.0, 2.0, 1.5, 2)


def test_fit_rate_recovers_synthetic_model():
    records = [_record(n, 3.0 * 2.0 ** (-1.5 * n) * n ** 0.75) for n in range(2, 12)]
    fit = fit_rate(records, drop_smallest=2)
    assert fit.rate == pytest.approx(1.5, abs=1e-9)
    assert fit.beta == pytest.approx(0.75, abs=1e-9)
    assert fit.constant == pytest.approx(3.0, rel=1e-9)
    assert fit.n_values == list(range(4, 12))


def test_fit_rate_rejects_unreliable_inputs():
    with pytest.raises(RateFitError):
        fit_rate([_record(n, 2.0 ** -n) for n in range(1, 5)], drop_smallest=2)
    with pytest.raises(RateFitError):
        fit_rate([_record(n, 2.0 ** -n, tail=2.0 ** -n) for n in range(1, 9)], drop_smallest=0)
    with pytest.raises(RateFitError):
        fit_rate([_record(n, 2.0 ** -n) for n in (0, 1, 2, 3)], drop_smallest=0)


def test_error_record_row():
    row = _record(3, 0.5, q=math.inf).to_row()
    assert list(row) == CSV_COLUMNS
    assert row["q"] == "inf"


def test_measure_error_on_korobov():
    op = named_operator("K*", d=1)
    f = korobov(2.0, 1, bandwidth=256)
    record = measure_error(op, f, 4, 2.0)
    assert record.dof == 16
    assert record.reliable
    assert 0 < record.error < exact_norm(f, 2.0)


def test_kantorovich_equivalence_ratio_is_stable():
    f = korobov(2.0, 1, bandwidth=512)
    points = kantorovich_equivalence(f, range(3, 8), 2.0)
    ratios = [p.ratio for p in points]
    assert all(0.05 <= r <= 20.0 for r in ratios)


def test_sharpness_table_single_axis():
    op = QuasiInterpOp(dirichlet_kernel(), char_averager(2), d=1, name="D+char")
    for n, c0, expected in sharpness_table(op, range(3, 8)):
        assert expected == pytest.approx(2 / math.pi)
        assert abs(c0 - expected) < 1e-10
    rows = sharpness_table(op, [4], scale=3.0)
    assert rows[0][2] == pytest.approx(6 / math.pi)
    assert abs(rows[0][1] - rows[0][2]) < 1e-10


def test_bench_function_wraps_model():
    f = korobov(2.0, 2, bandwidth=64)
    assert isinstance(f, BenchFunction)
    assert f.d == 2
    assert f.tail > 0.0
