"""
Разбиения единицы, двоичные блоки, нормы пространств Бесова и
Трибеля-Лизоркина смешанной гладкости, дискретные квазинормы
Литтлвуда-Пэли через Delta_j^Q и численные проверки условий на операторы.

Все нормы L_p берутся по нормированной мере (2 pi)^{-d} dx.
"""

import logging
import math
from dataclasses import asdict, dataclass, field
from enum import Enum
from typing import Any, Callable, Dict, List, Optional, Sequence

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
    MAX_GRID_POINTS,
    block_level,
    eval_on_grid,
    in_hyperbolic_cross,
)
from kernels import DEFECT_FLOOR, AveragerFamily, AveragerKind, bump_generator, ramp_generator
from operators import QuasiInterpOp
from smolyak import LevelEvaluator, mixed_difference

logger = logging.getLogger(__name__)

# Допустимое расхождение квадратуры при удвоении сетки
REFINEMENT_RTOL = 1e-6

# Кратность передискретизации сетки относительно ширины полосы
OVERSAMPLING = 4


class PhiKind(Enum):
    SMOOTH = "smooth"
    PIECEWISE_LINEAR = "piecewise_linear"


class NormFamily(Enum):
    B = "B"
    F = "F"


@dataclass(frozen=True)
class ResolutionOfUnity:
    """
    Двоичное разбиение единицы phi_j(xi) = phi_0(2^{-j} xi) - phi_0(2^{-j+1} xi), j >= 1
    """
    kind: PhiKind
    phi0: Callable[[np.ndarray], np.ndarray]

    def phi(self, j: int, xi) -> np.ndarray:
        xi = np.asarray(xi, dtype=np.float64)
        if j == 0:
            return self.phi0(xi)
        return self.phi0(xi / 2.0 ** j) - self.phi0(xi / 2.0 ** (j - 1))

    def max_level(self, kmax: int) -> int:
        """Наибольший j, для которого phi_j может быть ненулевой при |xi| <= kmax"""
        return int(block_level(np.array(int(kmax))))


def smooth_resolution() -> ResolutionOfUnity:
    return ResolutionOfUnity(PhiKind.SMOOTH, bump_generator())


def piecewise_linear_resolution() -> ResolutionOfUnity:
    """Кусочно-линейный вариант (вне класса гладких разбиений; для перекрестных проверок)"""
    return ResolutionOfUnity(PhiKind.PIECEWISE_LINEAR, ramp_generator(1.0, 2.0))


def resolution_from_kind(kind: str) -> ResolutionOfUnity:
    if kind == PhiKind.SMOOTH.value:
        return smooth_resolution()
    if kind == PhiKind.PIECEWISE_LINEAR.value:
        return piecewise_linear_resolution()
    raise ParameterError(f"Неизвестный тип разбиения единицы: {kind}")


@dataclass(frozen=True)
class NormSpec:
    """Параметры нормы: семейство B или F, p, theta из [1, inf], гладкость r"""
    family: NormFamily
    p: float
    theta: float
    r: float

    def __post_init__(self):
        object.__setattr__(self, "family", NormFamily(self.family))
        for name in ("p", "theta"):
            value = float(getattr(self, name))
            if not 1.0 <= value <= math.inf:
                raise ParameterError(f"{name} должно лежать в [1, inf], получено {value}")
            object.__setattr__(self, name, value)
        if self.family is NormFamily.F and math.isinf(self.p):
            raise ParameterError("Пространства F определены только для p < inf")


@dataclass
class NormRecord:
    """Результат вычисления нормы для вывода в JSON"""
    family: str
    p: float
    theta: float
    r: float
    value: float
    truncation: float
    phi_kind: Optional[str]
    operator: Optional[str] = None
    extra: Dict[str, Any] = field(default_factory=dict)

    def to_dict(self) -> Dict[str, Any]:
        data = asdict(self)
        for key in ("p", "theta"):
            if math.isinf(data[key]):
                data[key] = "inf"
        return data


def _seq_norm(values: np.ndarray, theta: float) -> float:
    """Норма l_theta последовательности неотрицательных чисел"""
    values = np.asarray(values, dtype=np.float64).reshape(-1)
    if len(values) == 0:
        return 0.0
    if math.isinf(theta):
        return float(values.max())
    return float(np.sum(values ** theta) ** (1.0 / theta))


def _grid_level(bandwidth: int) -> int:
    if bandwidth <= 0:
        return 0
    return int(math.ceil(math.log2(OVERSAMPLING * bandwidth)))


def _grid_mean_power(values: np.ndarray, q: float) -> float:
    mag = np.abs(values)
    if math.isinf(q):
        return float(mag.max())
    return float(np.mean(mag ** q) ** (1.0 / q))


def _check_grid(levels: Sequence[int]) -> None:
    if 2 ** sum(levels) > MAX_GRID_POINTS:
        raise QuadratureError(f"Сетка уровня {tuple(levels)} слишком велика для квадратуры")


def lq_norm(f: TrigPoly, q: float) -> float:
    """
    Норма L_q полинома по нормированной мере

    Args:
        f: Полином
        q: Показатель из [1, inf]

    Returns:
        q = 2 - точно по Парсевалю; иначе квадратура на сетке с передискретизацией
        и одним удвоением для контроля
    """
    if f.is_zero:
        return 0.0
    if q == 2:
        return f.l2_norm()
    levels = [_grid_level(b) for b in f.bandwidth()]
    finer = [level + 1 for level in levels]
    _check_grid(finer)
    coarse = _grid_mean_power(eval_on_grid(f, DyadicGrid(tuple(levels))), q)
    fine = _grid_mean_power(eval_on_grid(f, DyadicGrid(tuple(finer))), q)
    if math.isinf(q):
        return max(coarse, fine)
    if abs(fine - coarse) > REFINEMENT_RTOL * max(fine, 1e-300):
        logger.warning(f"L_{q}: квадратура при удвоении сетки изменилась с {coarse:.12g} до {fine:.12g}")
    return fine


def model_lq_norm(f: FunctionModel, q: float) -> float:
    """Норма L_q точной или спектральной модели (разделимые - произведением по осям)"""
    if isinstance(f, TrigPoly):
        return lq_norm(f, q)
    if isinstance(f, SpectralFunction):
        if f.is_separable:
            return float(np.prod([lq_norm(p, q) for p in f.axis_polys]))
        return lq_norm(f.to_trigpoly(), q)
    raise ModelError("Норма поточечной модели не вычисляется")


def lq_distance(f: FunctionModel, g: TrigPoly, q: float) -> float:
    """
    ||f_trunc - g||_q для точной или спектральной f

    Для разделимой f и q = 2 используется равенство Парсеваля без
    построения полного куба частот.
    """
    if isinstance(f, TrigPoly):
        return lq_norm(f - g, q)
    if isinstance(f, SpectralFunction):
        if f.is_separable and q == 2:
            on_support = f.coefficients_at(g.freqs)
            inside = float(np.sum(np.abs(on_support) ** 2))
            mismatch = float(np.sum(np.abs(on_support - g.coeffs) ** 2))
            outside = max(f.norm_sq() - inside, 0.0)
            return math.sqrt(outside + mismatch)
        return lq_norm(f.to_trigpoly() - g, q)
    raise ModelError("Расстояние до поточечной модели не вычисляется")


def dyadic_projection(f: TrigPoly, j: Sequence[int], phi: ResolutionOfUnity) -> TrigPoly:
    """
    delta_j f: умножение коэффициентов на phi_{j_1}(k_1)...phi_{j_d}(k_d)

    Args:
        f: Полином
        j: Уровень
        phi: Разбиение единицы

    Returns:
        Полином delta_j f
    """
    if len(j) != f.d:
        raise ParameterError(f"Уровень {tuple(j)} не согласован с d={f.d}")
    weights = np.ones(len(f), dtype=np.float64)
    for i, ji in enumerate(j):
        weights = weights * phi.phi(int(ji), f.freqs[:, i])
    return f.scale_coeffs(weights)


def _axis_weights(f: TrigPoly, phi: ResolutionOfUnity) -> List[np.ndarray]:
    """Для каждой оси массив (J_i + 1, N) значений phi_j(k_i)"""
    out = []
    for i, band in enumerate(f.bandwidth()):
        levels = phi.max_level(band)
        out.append(np.stack([phi.phi(j, f.freqs[:, i]) for j in range(levels + 1)]))
    return out


def _block_norms(f: TrigPoly, p: float, phi: ResolutionOfUnity) -> np.ndarray:
    """Тензор ||delta_j f||_p по всем j, где блоки могут быть ненулевыми"""
    if f.is_zero:
        return np.zeros((1,) * f.d)
    weights = _axis_weights(f, phi)
    if p == 2:
        letters = "abcdefghijklmnopqrstuvwxy"[:f.d]
        subscripts = ",".join(f"{c}z" for c in letters) + ",z->" + letters
        energy = np.einsum(subscripts, *[w ** 2 for w in weights], np.abs(f.coeffs) ** 2)
        return np.sqrt(np.maximum(energy, 0.0))
    shape = tuple(w.shape[0] for w in weights)
    out = np.zeros(shape)
    for j in np.ndindex(*shape):
        row = np.ones(len(f))
        for i, ji in enumerate(j):
            row = row * weights[i][ji]
        if np.any(row != 0):
            out[j] = lq_norm(f.scale_coeffs(row), p)
    return out


def _outer(arrays: Sequence[np.ndarray]) -> np.ndarray:
    out = np.asarray(arrays[0])
    for arr in arrays[1:]:
        out = np.multiply.outer(out, arr)
    return out


def _level_weights(shape: Sequence[int], r: float) -> np.ndarray:
    total = np.indices(shape).sum(axis=0) if shape else np.zeros(())
    return 2.0 ** (r * total)


def block_norms(f: FunctionModel, p: float, phi: ResolutionOfUnity) -> np.ndarray:
    """Тензор норм двоичных блоков ||delta_j f||_p"""
    if isinstance(f, SpectralFunction):
        if f.is_separable:
            return _outer([_block_norms(poly, p, phi) for poly in f.axis_polys])
        f = f.to_trigpoly()
    if isinstance(f, PointwiseFunction):
        raise ModelError("Блоки поточечной модели не вычисляются")
    return _block_norms(f, p, phi)


def besov_norm(f: FunctionModel, spec: NormSpec, phi: ResolutionOfUnity) -> float:
    """
    ||f||_B = || 2^{r|j|_1} ||delta_j f||_p ||_{l_theta}

    Args:
        f: Точная или спектральная модель
        spec: Параметры нормы
        phi: Разбиение единицы

    Returns:
        Значение нормы
    """
    blocks = block_norms(f, spec.p, phi)
    return _seq_norm(blocks * _level_weights(blocks.shape, spec.r), spec.theta)


def _tl_aggregate(f: TrigPoly, spec: NormSpec, phi: ResolutionOfUnity) -> float:
    if f.is_zero:
        return 0.0
    levels = tuple(_grid_level(b) for b in f.bandwidth())
    _check_grid(levels)
    grid = DyadicGrid(levels)
    weights = _axis_weights(f, phi)
    acc = np.zeros(grid.shape)
    for j in np.ndindex(*[w.shape[0] for w in weights]):
        row = np.ones(len(f))
        for i, ji in enumerate(j):
            row = row * weights[i][ji]
        if not np.any(row != 0):
            continue
        values = np.abs(eval_on_grid(f.scale_coeffs(row), grid)) * 2.0 ** (spec.r * sum(j))
        if math.isinf(spec.theta):
            acc = np.maximum(acc, values)
        else:
            acc += values ** spec.theta
    if not math.isinf(spec.theta):
        acc = acc ** (1.0 / spec.theta)
    return _grid_mean_power(acc, spec.p)


def tl_norm(f: FunctionModel, spec: NormSpec, phi: ResolutionOfUnity) -> float:
    """
    ||f||_F = || (sum_j |2^{r|j|_1} delta_j f(x)|^theta)^{1/theta} ||_{L_p}

    Args:
        f: Точная или спектральная модель
        spec: Параметры нормы (p < inf)
        phi: Разбиение единицы

    Returns:
        Значение нормы
    """
    if math.isinf(spec.p):
        raise ParameterError("Норма F определена только для p < inf")
    if isinstance(f, SpectralFunction):
        if f.is_separable:
            # для тензорного произведения агрегат распадается по осям
            return float(np.prod([_tl_aggregate(poly, spec, phi) for poly in f.axis_polys]))
        f = f.to_trigpoly()
    if isinstance(f, PointwiseFunction):
        raise ModelError("Норма поточечной модели не вычисляется")
    return _tl_aggregate(f, spec, phi)


def sobolev_norm(f: FunctionModel, p: float, r: float, phi: ResolutionOfUnity) -> float:
    """Норма W_p^r через совпадение с F_{p,2}^r при 1 < p < inf"""
    if not 1.0 < p < math.inf:
        raise ParameterError(f"Норма Соболева вычисляется для 1 < p < inf, получено {p}")
    return tl_norm(f, NormSpec(NormFamily.F, p, 2.0, r), phi)


def _axis_inner(a: TrigPoly, b: TrigPoly) -> complex:
    _, ia, ib = np.intersect1d(a.freqs[:, 0], b.freqs[:, 0], return_indices=True)
    return complex(np.sum(a.coeffs[ia] * np.conj(b.coeffs[ib])))


def _truncation_l2(evaluator: LevelEvaluator, f: FunctionModel, jmax: int) -> float:
    """||f - Q_{(jmax,...,jmax)} f||_2 плюс хвост спектральной модели"""
    top = (jmax,) * evaluator.op.d
    if isinstance(f, SpectralFunction) and f.is_separable:
        cross, norm_q = 1.0 + 0j, 1.0
        for i, poly in enumerate(f.axis_polys):
            q = evaluator.axis(i, jmax)
            cross *= _axis_inner(poly, q)
            norm_q *= q.l2_norm() ** 2
        value = f.norm_sq() - 2.0 * cross.real + norm_q
        return math.sqrt(max(value, 0.0)) + f.tail
    if isinstance(f, SpectralFunction):
        return (f.to_trigpoly() - evaluator(top)).l2_norm() + f.tail
    return (f - evaluator(top)).l2_norm()


def discrete_lp_quasi_norm(op: QuasiInterpOp, f: FunctionModel, spec: NormSpec, jmax: int,
                           path: str = "aliasing") -> NormRecord:
    """
    Дискретная квазинорма || 2^{r|j|_1} Delta_j^Q f || по |j|_inf <= jmax

    Args:
        op: Оператор
        f: Точная или спектральная модель
        spec: Параметры нормы (r > 0)
        jmax: Уровень усечения
        path: Путь вычисления Q_j

    Returns:
        NormRecord; truncation - оценка ||f - Q_jmax f||_2
    """
    if spec.r <= 0:
        raise ParameterError(f"Дискретная квазинорма требует r > 0, получено {spec.r}")
    evaluator = LevelEvaluator(op, f, path)
    d = op.d

    if evaluator.separable:
        diffs = [[evaluator.axis_difference(i, level) for level in range(jmax + 1)]
                 for i in range(d)]
        if spec.family is NormFamily.B:
            norms = _outer([np.array([lq_norm(t, spec.p) for t in axis]) for axis in diffs])
            value = _seq_norm(norms * _level_weights(norms.shape, spec.r), spec.theta)
        else:
            value = float(np.prod([_pointwise_aggregate(axis, [(level,) for level in range(jmax + 1)],
                                                        spec) for axis in diffs]))
    else:
        levels = list(np.ndindex(*([jmax + 1] * d)))
        diffs = [mixed_difference(op, f, j, path, evaluator) for j in levels]
        if spec.family is NormFamily.B:
            norms = np.array([lq_norm(t, spec.p) for t in diffs]).reshape((jmax + 1,) * d)
            value = _seq_norm(norms * _level_weights(norms.shape, spec.r), spec.theta)
        else:
            value = _pointwise_aggregate(diffs, levels, spec)

    truncation = _truncation_l2(evaluator, f, jmax)
    logger.info(f"Квазинорма {spec.family.value} ({op.name}, jmax={jmax}): {value:.6g}, "
                f"усечение {truncation:.3g}")
    return NormRecord(family=spec.family.value, p=spec.p, theta=spec.theta, r=spec.r,
                      value=value, truncation=truncation, phi_kind=None, operator=op.name,
                      extra={"jmax": jmax, "path": path})


def _pointwise_aggregate(parts: Sequence[TrigPoly], levels: Sequence[Sequence[int]],
                         spec: NormSpec) -> float:
    """L_p норма поточечного агрегата (sum_j |2^{r|j|_1} g_j(x)|^theta)^{1/theta}"""
    live = [(t, j) for t, j in zip(parts, levels) if not t.is_zero]
    if not live:
        return 0.0
    d = live[0][0].d
    band = np.max(np.array([t.bandwidth() for t, _ in live]), axis=0)
    grid_levels = tuple(_grid_level(int(b)) for b in band)
    _check_grid(grid_levels)
    grid = DyadicGrid(grid_levels)
    acc = np.zeros(grid.shape)
    for t, j in live:
        values = np.abs(eval_on_grid(t, grid)) * 2.0 ** (spec.r * sum(j))
        if math.isinf(spec.theta):
            acc = np.maximum(acc, values)
        else:
            acc += values ** spec.theta
    if not math.isinf(spec.theta):
        acc = acc ** (1.0 / spec.theta)
    logger.debug(f"Агрегат F на сетке {grid.shape} (d={d})")
    return _grid_mean_power(acc, spec.p)


def averager_norm_Lqj(avg: AveragerFamily, q: float, j: int, start: int = 8,
                      max_level: int = 16, rtol: float = 1e-9) -> float:
    """
    Норма ||phi~_j||_{L_{q,j}}: среднее по ячейке [-pi 2^{-j}, pi 2^{-j})
    от (2^{-j} sum_{k in A_j} |phi~_j(x - x_k)|)^q

    Args:
        avg: Усреднение с плотностью во временной области
        q: Показатель из [1, inf]
        j: Уровень
        start: Начальный log2 числа узлов правила средних точек
        max_level: Предельный log2 числа узлов
        rtol: Относительный допуск при удвоении

    Returns:
        Значение нормы
    """
    if avg.kind is not AveragerKind.FUNCTION or avg.density is None:
        raise ModelError(f"Норма L_q,j определена для усреднений-функций, получено {avg.name}")
    h = np.pi / float(1 << j)
    size = 1 << j
    nodes = 2.0 * np.pi * np.arange(-(size >> 1), size - (size >> 1)) / size
    previous = None
    for level in range(start, max_level + 1):
        m = 1 << level
        x = -h + (np.arange(m) + 0.5) * (2.0 * h / m)
        chunk = max(1, (1 << 22) // size)
        total = np.empty(m)
        for lo in range(0, m, chunk):
            shifted = x[lo:lo + chunk, None] - nodes[None, :]
            total[lo:lo + chunk] = np.abs(avg.evaluate_density(j, shifted)).sum(axis=1) / size
        current = _grid_mean_power(total, q)
        if previous is not None and abs(current - previous) <= rtol * max(abs(current), 1e-300):
            return current
        previous = current
    raise QuadratureError(f"Норма L_{q},{j} не сошлась до 2^{max_level} узлов")


@dataclass
class CompatReport:
    """Эвристическая проверка условия совместимости (не доказательство)"""
    s: float
    delta: float
    levels: List[int]
    proxies: List[float]
    slope: float
    verdict: str
    heuristic: bool = True

    @property
    def passed(self) -> bool:
        return self.verdict == "PASS"

    @property
    def value(self) -> float:
        return max(self.proxies) if self.proxies else 0.0

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)


def _branch_proxy(g: np.ndarray, h: float) -> float:
    l2 = math.sqrt(h * float(np.sum(np.abs(g) ** 2)))
    if len(g) < 3:
        return l2
    second = (g[2:] - 2.0 * g[1:-1] + g[:-2]) / h ** 2
    return l2 + math.sqrt(h * float(np.sum(np.abs(second) ** 2)))


def compat_condition_proxy(op: QuasiInterpOp, s: float, delta: float, jmax: int,
                           jmin: int = 4, phi0: Optional[Callable] = None,
                           slope_limit: float = 0.25) -> CompatReport:
    """
    Соболевский заменитель нормы мультипликатора для
    g_j(xi) = (1 - phi^_j phi~^_j)/xi^s * phi_0(delta xi), xi = 2^{-j} k

    Args:
        op: Оператор (используются одномерные символы)
        s: Порядок
        delta: Сжатие срезающей функции
        jmax: Наибольший уровень
        jmin: Наименьший уровень
        phi0: Срезающая функция (по умолчанию гладкая)
        slope_limit: Допустимый наклон log2 заменителя по уровням

    Returns:
        CompatReport с вердиктом PASS (ограничено) или FAIL (рост)
    """
    if s <= 0 or delta <= 0:
        raise ParameterError(f"Требуется s > 0 и delta > 0, получено s={s}, delta={delta}")
    phi0 = phi0 or bump_generator()
    levels = list(range(jmin, jmax + 1))
    proxies = []
    for j in levels:
        h = 1.0 / float(1 << j)
        kmax = int(math.floor(2.0 * (1 << j) / delta))
        value = 0.0
        # ветви k > 0 и k < 0 раздельно: при xi = 0 g не определена
        for sign in (1, -1):
            k = sign * np.arange(1, kmax + 1, dtype=np.int64)
            xi = k * h
            defect = 1.0 - op.kern.symbol(j, k) * op.avg.symbol(j, k)
            defect = np.where(np.abs(defect) <= DEFECT_FLOOR, 0.0, defect)
            g = defect / np.abs(xi) ** s * phi0(delta * xi)
            value += _branch_proxy(g, h)
        proxies.append(value)

    tail = max(3, (len(levels) + 1) // 2)
    tail_levels = np.array(levels[-tail:], dtype=np.float64)
    tail_values = np.array(proxies[-tail:])
    if np.all(tail_values == 0):
        slope = 0.0
    elif np.any(tail_values == 0):
        slope = math.inf
    else:
        slope = float(np.polyfit(tail_levels, np.log2(tail_values), 1)[0])
    verdict = "PASS" if slope <= slope_limit else "FAIL"
    logger.info(f"Условие совместимости s={s} ({op.name}): наклон {slope:.3f} -> {verdict}")
    return CompatReport(s=s, delta=delta, levels=levels, proxies=proxies, slope=slope,
                        verdict=verdict)


@dataclass(frozen=True)
class CondPattern:
    xi: int
    lam: complex


def check_cond(avg: AveragerFamily, umax: int = 14, tol: float = 1e-12) -> Optional[CondPattern]:
    """
    Поиск (xi, lambda): D(j,u) = phi~^_j(2^u) - phi~^_{j-1}(2^u) равно lambda при j = u - xi
    и 0 при 0 <= j < u - xi, для всех u из [xi+1, umax]

    Args:
        avg: Усреднение
        umax: Наибольший показатель u
        tol: Допуск

    Returns:
        CondPattern или None
    """
    def value(j: int, u: int) -> complex:
        return avg.symbol(j, 1 << u) if j >= 0 else 0j

    def diff(j: int, u: int) -> complex:
        return value(j, u) - value(j - 1, u)

    for xi in range(0, umax):
        lam = None
        ok = True
        for u in range(xi + 1, umax + 1):
            top = u - xi
            current = diff(top, u)
            if lam is None:
                lam = current
            if abs(lam) <= tol or abs(current - lam) > tol:
                ok = False
                break
            if any(abs(diff(j, u)) > tol for j in range(top)):
                ok = False
                break
        if ok and lam is not None:
            return CondPattern(xi=xi, lam=lam)
    return None


def best_approx_error_L2(f: FunctionModel, m: int) -> float:
    """
    Ошибка наилучшего приближения в L_2 частотами из куба [-m, m]^d

    Args:
        f: Точная или спектральная модель
        m: Полуширина куба

    Returns:
        Норма отброшенных коэффициентов (с хвостом спектральной модели)
    """
    if isinstance(f, TrigPoly):
        outside = np.any(np.abs(f.freqs) > m, axis=1)
        return float(np.sqrt(np.sum(np.abs(f.coeffs[outside]) ** 2)))
    if isinstance(f, SpectralFunction):
        if f.is_separable:
            total, inner = 1.0, 1.0
            for poly in f.axis_polys:
                energy = np.abs(poly.coeffs) ** 2
                total *= float(energy.sum())
                inner *= float(energy[np.abs(poly.freqs[:, 0]) <= m].sum())
            return math.sqrt(max(total - inner, 0.0) + f.tail ** 2)
        return math.sqrt(best_approx_error_L2(f.to_trigpoly(), m) ** 2 + f.tail ** 2)
    raise ModelError("Наилучшее приближение поточечной модели не вычисляется")


def best_approx_error_cross_L2(f: FunctionModel, n: int) -> float:
    """Ошибка наилучшего приближения в L_2 частотами ступенчатого креста Q_n"""
    if isinstance(f, TrigPoly):
        outside = ~in_hyperbolic_cross(f.freqs, n)
        return float(np.sqrt(np.sum(np.abs(f.coeffs[outside]) ** 2)))
    if isinstance(f, SpectralFunction):
        if f.is_separable:
            per_axis = []
            for poly in f.axis_polys:
                energy = np.abs(poly.coeffs) ** 2
                blocks = block_level(poly.freqs[:, 0])
                per_axis.append(np.bincount(blocks, weights=energy, minlength=n + 1)[:n + 1])
            masses = _outer(per_axis)
            inner = float(np.sum(masses[np.indices(masses.shape).sum(axis=0) <= n]))
            return math.sqrt(max(f.norm_sq() - inner, 0.0) + f.tail ** 2)
        return math.sqrt(best_approx_error_cross_L2(f.to_trigpoly(), n) ** 2 + f.tail ** 2)
    raise ModelError("Наилучшее приближение поточечной модели не вычисляется")


def _univariate_poly(f: FunctionModel) -> TrigPoly:
    if f.d != 1:
        raise ParameterError("Модуль гладкости вычисляется для одномерных функций")
    if isinstance(f, TrigPoly):
        return f
    if isinstance(f, SpectralFunction):
        return f.to_trigpoly()
    raise ModelError("Модуль гладкости поточечной модели не вычисляется")


def modulus2(f: FunctionModel, delta: float, p: float, steps: int = 64) -> float:
    """
    Модуль гладкости второго порядка sup_{0 < h <= delta} ||f(.+h) - 2f + f(.-h)||_p

    Args:
        f: Одномерная точная или спектральная модель
        delta: Радиус
        p: Показатель нормы
        steps: Число значений h на (0, delta]

    Returns:
        Максимум по сетке h
    """
    poly = _univariate_poly(f)
    k = poly.freqs[:, 0].astype(np.float64)
    best = 0.0
    for h in delta * np.arange(1, steps + 1) / steps:
        best = max(best, lq_norm(poly.scale_coeffs(2.0 * np.cos(k * h) - 2.0), p))
    return best
