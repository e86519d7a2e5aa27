"""
Квазиинтерполяционные операторы Q_j(f, phi, phi~) на торе: точное
вычисление через формулу наложения частот и восстановление по отсчетам
на двоичной сетке, а также именованные операторы I_j, V_j, K_j, K*_j.
"""

import logging
from dataclasses import dataclass, replace
from typing import Optional, Sequence

import numpy as np

from fourier_core import (
    DyadicGrid,
    FunctionModel,
    ModelError,
    ParameterError,
    PointwiseFunction,
    QuadratureError,
    SpectralFunction,
    TrigPoly,
    as_level,
    eval_on_grid,
    fold_frequency,
    grid_to_coeffs,
    tensor_product,
)
from kernels import (
    AveragerFamily,
    AveragerKind,
    KernelFamily,
    char_averager,
    delta_averager,
    dlvp_kernel,
    modified_dlvp_kernel,
)

logger = logging.getLogger(__name__)

OPERATOR_NAMES = ("I", "V", "K", "K*")

# Значения генератора по умолчанию: плато rho и носитель rho + support <= 1
# исключают наложение частот плато на решетке из 2^j узлов
DEFAULT_RHO = 0.25
DEFAULT_SUPPORT = 0.5


@dataclass(frozen=True)
class QuadratureRule:
    """Составная квадратура Гаусса-Лежандра с удвоением числа панелей"""
    nodes: int = 16
    tol: float = 1e-9
    max_doublings: int = 8

    def __post_init__(self):
        if self.nodes < 16:
            raise ParameterError(f"Требуется не менее 16 узлов на панель, получено {self.nodes}")


@dataclass(frozen=True)
class QuasiInterpOp:
    """
    Оператор Q_j(., phi, phi~) в тензорной форме по d осям.
    sampling=False означает чистую свертку f * phi_j без дискретизации.
    """
    kern: KernelFamily
    avg: AveragerFamily
    d: int = 1
    name: str = "Q"
    sampling: bool = True
    quadrature: Optional[QuadratureRule] = None

    def univariate(self) -> "QuasiInterpOp":
        return replace(self, d=1)

    def with_dimension(self, d: int) -> "QuasiInterpOp":
        return replace(self, d=d)


def named_operator(name: str, d: int = 1, sigma: int = 2, rho: float = DEFAULT_RHO,
                   support: float = DEFAULT_SUPPORT, correction: str = "plateau",
                   quadrature: Optional[QuadratureRule] = None) -> QuasiInterpOp:
    """
    Именованный оператор

    Args:
        name: I (отсчеты), V (свертка), K (Канторович), K* (модифицированный Канторович)
        d: Размерность
        sigma: Параметр характеристического усреднения
        rho: Плато генератора
        support: Носитель генератора
        correction: Зона обратной sinc-коррекции для K*
        quadrature: Квадратура для поточечно заданных функций

    Returns:
        QuasiInterpOp
    """
    if name == "I":
        return QuasiInterpOp(dlvp_kernel(rho, support), delta_averager(), d=d, name="I")
    if name == "V":
        return QuasiInterpOp(dlvp_kernel(rho, support), delta_averager(), d=d, name="V",
                             sampling=False)
    if name == "K":
        return QuasiInterpOp(dlvp_kernel(rho, support), char_averager(sigma), d=d, name="K",
                             quadrature=quadrature or QuadratureRule())
    if name == "K*":
        return QuasiInterpOp(modified_dlvp_kernel(rho, support, sigma, correction),
                             char_averager(sigma), d=d, name="K*",
                             quadrature=quadrature or QuadratureRule())
    raise ParameterError(f"Неизвестный оператор: {name} (допустимы {', '.join(OPERATOR_NAMES)})")


def _averager_weights(avg: AveragerFamily, freqs: np.ndarray, j: Sequence[int]) -> np.ndarray:
    weights = np.ones(len(freqs), dtype=np.complex128)
    for i, ji in enumerate(j):
        weights = weights * avg.symbol(ji, freqs[:, i])
    return weights


def _kernel_weights(kern: KernelFamily, freqs: np.ndarray, j: Sequence[int]) -> np.ndarray:
    weights = np.ones(len(freqs), dtype=np.complex128)
    for i, ji in enumerate(j):
        weights = weights * kern.symbol(ji, freqs[:, i])
    return weights


def expand_aliases(kern: KernelFamily, residues: TrigPoly, j: Sequence[int]) -> TrigPoly:
    """
    Продолжение коэффициентов с решетки A_j на все частоты m = r + l 2^j
    с весом phi^_j(m) по каждой оси

    Args:
        kern: Ядро
        residues: Полином с частотами из A_{j_1} x ... x A_{j_d}
        j: Уровень

    Returns:
        Полином sum_r c_r sum_l phi^_j(r + l 2^j) e^{i(r + l 2^j)x}
    """
    rows, values = residues.freqs, residues.coeffs
    for i, ji in enumerate(j):
        if len(rows) == 0:
            break
        period = 1 << ji
        band = kern.bandwidth(ji)
        reach = band // period + 1
        ell = np.arange(-reach, reach + 1, dtype=np.int64)
        cand = rows[:, i:i + 1] + ell[None, :] * period
        sym = np.zeros(cand.shape, dtype=np.complex128)
        inside = np.abs(cand) < band
        sym[inside] = kern.symbol(ji, cand[inside])
        r_idx, c_idx = np.nonzero(sym)
        rows = rows[r_idx].copy()
        rows[:, i] = cand[r_idx, c_idx]
        values = values[r_idx] * sym[r_idx, c_idx]
    return TrigPoly(residues.d, rows, values)


def _check_model(op: QuasiInterpOp, f: FunctionModel) -> None:
    if f.d != op.d:
        raise ParameterError(f"Размерность функции {f.d} не совпадает с оператором d={op.d}")
    if isinstance(f, SpectralFunction):
        f.require_bandwidth()


def convolve(op: QuasiInterpOp, f: FunctionModel, j: Sequence[int]) -> TrigPoly:
    """
    Свертка f * phi_j (* phi~_j): умножение коэффициентов на символы

    Args:
        op: Оператор
        f: Точная или спектральная модель
        j: Уровень

    Returns:
        Полином с коэффициентами phi^_j(k) phi~^_j(k) f^(k)
    """
    j = as_level(j, op.d)
    _check_model(op, f)
    if isinstance(f, PointwiseFunction):
        raise ModelError("Свертка требует точную или спектральную модель")
    if isinstance(f, SpectralFunction):
        if f.is_separable:
            uni = op.univariate()
            return tensor_product([convolve(uni, p, (ji,)) for p, ji in zip(f.axis_polys, j)])
        f = f.to_trigpoly()
    weights = _kernel_weights(op.kern, f.freqs, j) * _averager_weights(op.avg, f.freqs, j)
    return f.scale_coeffs(weights)


def apply_aliasing(op: QuasiInterpOp, f: FunctionModel, j: Sequence[int]) -> TrigPoly:
    """
    Q_j f по формуле наложения: Q^(m) = phi^_j(m) sum_l phi~^_j(m + l 2^j) f^(m + l 2^j)

    Args:
        op: Оператор
        f: Точная или спектральная модель с шириной полосы
        j: Уровень

    Returns:
        Точный полином Q_j f
    """
    j = as_level(j, op.d)
    if not op.sampling:
        return convolve(op, f, j)
    _check_model(op, f)
    if isinstance(f, PointwiseFunction):
        raise ModelError("Формула наложения требует коэффициенты Фурье функции")
    if isinstance(f, SpectralFunction):
        if f.is_separable:
            uni = op.univariate()
            return tensor_product([apply_aliasing(uni, p, (ji,)) for p, ji in zip(f.axis_polys, j)])
        f = f.to_trigpoly()
    if f.is_zero:
        return TrigPoly.zero(op.d)
    values = f.coeffs * _averager_weights(op.avg, f.freqs, j)
    # TrigPoly складывает совпавшие после свертки частоты
    residues = TrigPoly(op.d, fold_frequency(f.freqs, np.asarray(j)), values)
    return expand_aliases(op.kern, residues, j)


def _gauss_legendre_box(func, centers: np.ndarray, halfwidth: np.ndarray,
                        rule: QuadratureRule) -> np.ndarray:
    """
    Нормированные средние func по кубам [c - h, c + h] с удвоением панелей

    Args:
        func: Функция точек формы (..., d)
        centers: Центры (M, d)
        halfwidth: Полуширины по осям (d,)
        rule: Параметры квадратуры

    Returns:
        Средние значения (M,)
    """
    d = centers.shape[1]
    base_x, base_w = np.polynomial.legendre.leggauss(rule.nodes)
    previous = None
    err = np.inf
    panels = 1
    for _ in range(rule.max_doublings + 1):
        # узлы на [-1, 1], разбитом на panels равных частей
        edges = np.linspace(-1.0, 1.0, panels + 1)
        mid = 0.5 * (edges[:-1] + edges[1:])
        x = (mid[:, None] + base_x[None, :] / panels).reshape(-1)
        w = np.tile(base_w / panels, panels) / 2.0
        mesh = np.meshgrid(*([x] * d), indexing="ij")
        offsets = np.stack([m.reshape(-1) for m in mesh], axis=-1) * halfwidth
        wmesh = np.ones(1)
        for _axis in range(d):
            wmesh = np.multiply.outer(wmesh, w).reshape(-1)
        points = centers[:, None, :] + offsets[None, :, :]
        current = np.asarray(func(points), dtype=np.complex128) @ wmesh
        if previous is not None:
            err = np.max(np.abs(current - previous))
            if err < rule.tol:
                return current
        previous = current
        panels *= 2
    raise QuadratureError(
        f"Квадратура не сошлась за {rule.max_doublings} удвоений (оценка ошибки {err:.3g})")


def kantorovich_avg(f: FunctionModel, j: int, sigma: int, x, rule: Optional[QuadratureRule] = None):
    """
    Нормированное среднее f по отрезку [x - pi 2^{-j-sigma}, x + pi 2^{-j-sigma}]

    Args:
        f: Одномерная модель функции
        j: Уровень
        sigma: Параметр сжатия
        x: Точка или массив точек
        rule: Квадратура для поточечной модели

    Returns:
        complex для скаляра, иначе массив
    """
    if f.d != 1:
        raise ParameterError("Среднее Канторовича вычисляется для одномерных функций")
    x_arr = np.atleast_1d(np.asarray(x, dtype=np.float64))
    if isinstance(f, PointwiseFunction):
        h = np.array([np.pi / float(1 << (j + sigma))])
        out = _gauss_legendre_box(f, x_arr[:, None], h, rule or QuadratureRule())
    else:
        poly = f.axis_polys[0] if isinstance(f, SpectralFunction) else f
        avg = char_averager(sigma)
        out = poly.scale_coeffs(avg.symbol(j, poly.freqs[:, 0])).evaluate(x_arr[:, None])
    return complex(out[0]) if np.ndim(x) == 0 else out


def _pointwise_samples(op: QuasiInterpOp, f: PointwiseFunction, grid: DyadicGrid) -> np.ndarray:
    points = grid.points()
    avg = op.avg
    if avg.kind is AveragerKind.DELTA:
        return avg.scale ** grid.d * f(points)
    if avg.kind is AveragerKind.DELTA_COMBINATION:
        # sum_b prod_i w_{b_i} f(x - (h_{b_1}, ..., h_{b_d}))
        total = np.zeros(grid.shape, dtype=np.complex128)
        axis_shifts = [avg.shift_offsets(ji) for ji in grid.j]
        for combo in np.ndindex(*[len(avg.weights)] * grid.d):
            weight = np.prod([avg.weights[c] for c in combo])
            shift = np.array([axis_shifts[i][c] for i, c in enumerate(combo)])
            total += weight * f(points - shift)
        return total
    if op.quadrature is None or avg.halfwidth is None:
        raise ModelError(f"Для поточечной функции и усреднения {avg.name} не задана квадратура")
    halfwidth = np.array([avg.halfwidth(ji) for ji in grid.j])
    centers = points.reshape(-1, grid.d)
    values = _gauss_legendre_box(f, centers, halfwidth, op.quadrature)
    return avg.scale ** grid.d * values.reshape(grid.shape)


def sample_averages(op: QuasiInterpOp, f: FunctionModel, j: Sequence[int]) -> np.ndarray:
    """
    Отсчеты (f * phi~_j)(x_k) во всех узлах сетки уровня j

    Args:
        op: Оператор
        f: Модель функции
        j: Уровень

    Returns:
        Комплексный тензор формы 2^{j_1} x ... x 2^{j_d}
    """
    j = as_level(j, op.d)
    _check_model(op, f)
    grid = DyadicGrid(j)
    if isinstance(f, PointwiseFunction):
        return _pointwise_samples(op, f, grid)
    if isinstance(f, SpectralFunction):
        f = f.to_trigpoly()
    averaged = f.scale_coeffs(_averager_weights(op.avg, f.freqs, j))
    return eval_on_grid(averaged, grid)


def apply_sampled(op: QuasiInterpOp, f: FunctionModel, j: Sequence[int]) -> TrigPoly:
    """
    Q_j f по отсчетам: 2^{-|j|_1} sum_k (f * phi~_j)(x_k) phi_j(x - x_k)

    Args:
        op: Оператор
        f: Модель функции
        j: Уровень

    Returns:
        Полином Q_j f
    """
    j = as_level(j, op.d)
    if not op.sampling:
        return convolve(op, f, j)
    if isinstance(f, SpectralFunction) and f.is_separable:
        _check_model(op, f)
        uni = op.univariate()
        return tensor_product([apply_sampled(uni, p, (ji,)) for p, ji in zip(f.axis_polys, j)])
    samples = sample_averages(op, f, j)
    residues = grid_to_coeffs(samples, j)
    return expand_aliases(op.kern, residues, j)


def apply(op: QuasiInterpOp, f: FunctionModel, j: Sequence[int], path: str = "sampled") -> TrigPoly:
    """Q_j f выбранным путем: sampled или aliasing"""
    if path == "sampled":
        return apply_sampled(op, f, j)
    if path == "aliasing":
        return apply_aliasing(op, f, j)
    raise ParameterError(f"Неизвестный путь вычисления: {path}")


def level_operator(op: QuasiInterpOp, f: FunctionModel, j: Sequence[int],
                   path: str = "sampled") -> TrigPoly:
    """Q_j f с соглашением Q_{-1} = 0 по любой оси"""
    if any(int(ji) < 0 for ji in j):
        return TrigPoly.zero(op.d)
    return apply(op, f, j, path)
