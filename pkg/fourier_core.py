"""
Разреженное Фурье-представление периодических функций на торе T^d,
двоичные сетки, дискретные преобразования Фурье и ступенчатые
гиперболические кресты.
"""

import itertools
import json
import logging
from dataclasses import dataclass
from functools import cached_property
from typing import Callable, Dict, FrozenSet, Iterable, Mapping, Optional, Sequence, Tuple, Union

import numpy as np
import scipy.fft
from typing_extensions import TypeAlias

logger = logging.getLogger(__name__)

FreqIndex: TypeAlias = Tuple[int, ...]
LevelVec: TypeAlias = Tuple[int, ...]

# Предел числа узлов плотной сетки, которую разрешено строить
MAX_GRID_POINTS = 1 << 26


class HypercrossError(Exception):
    """Базовое исключение библиотеки"""
    pass


class ShapeMismatchError(HypercrossError, ValueError):
    """Форма тензора значений не соответствует уровню сетки"""
    pass


class ParameterError(HypercrossError, ValueError):
    """Параметры семейства или операции вне допустимой области"""
    pass


class ModelError(HypercrossError):
    """Модель функции не подходит для выбранного пути вычисления"""
    pass


class QuadratureError(HypercrossError):
    """Квадратура не сошлась или сетка превышает допустимый размер"""
    pass


def as_level(j: Iterable[int], d: Optional[int] = None) -> LevelVec:
    """
    Приводит уровень к кортежу неотрицательных целых

    Args:
        j: Вектор уровней (или одно число для d=1)
        d: Ожидаемая размерность

    Returns:
        Кортеж уровней
    """
    if isinstance(j, (int, np.integer)):
        j = (int(j),)
    level = tuple(int(x) for x in j)
    if d is not None and len(level) != d:
        raise ParameterError(f"Уровень {level} не согласован с размерностью d={d}")
    if any(x < 0 for x in level):
        raise ParameterError(f"Уровень {level} содержит отрицательные компоненты")
    return level


def fold_frequency(k, j) -> np.ndarray:
    """
    Представитель частоты k по модулю 2^j из множества A_j = [-2^{j-1}, 2^{j-1})

    Args:
        k: Целые частоты (массив любой формы; последняя ось соответствует осям, если j - вектор)
        j: Уровень или вектор уровней

    Returns:
        Свернутые частоты той же формы
    """
    k = np.asarray(k, dtype=np.int64)
    j = np.asarray(j, dtype=np.int64)
    period = np.left_shift(np.int64(1), j)
    half = period >> 1
    return np.mod(k + half, period) - half


def block_level(k) -> np.ndarray:
    """Номер двоичного блока: 0 для k=0, иначе floor(log2|k|)+1"""
    a = np.abs(np.asarray(k, dtype=np.int64))
    out = np.zeros(a.shape, dtype=np.int64)
    nz = a > 0
    # frexp точен для целых до 2^53
    out[nz] = np.frexp(a[nz].astype(np.float64))[1]
    return out


@dataclass(frozen=True, eq=False)
class TrigPoly:
    """
    Тригонометрический полином: конечное отображение частот k из Z^d
    в комплексные коэффициенты. Хранится в каноническом виде: частоты
    упорядочены лексикографически, повторы сложены, точные нули удалены.
    """
    d: int
    freqs: np.ndarray
    coeffs: np.ndarray

    def __post_init__(self):
        if self.d < 1:
            raise ParameterError(f"Размерность должна быть >= 1, получено {self.d}")
        freqs = np.asarray(self.freqs, dtype=np.int64).reshape(-1, self.d)
        coeffs = np.asarray(self.coeffs, dtype=np.complex128).reshape(-1)
        if len(freqs) != len(coeffs):
            raise ShapeMismatchError(
                f"Число частот ({len(freqs)}) не равно числу коэффициентов ({len(coeffs)})")

        if len(freqs):
            uniq, inv = np.unique(freqs, axis=0, return_inverse=True)
            inv = np.asarray(inv).reshape(-1)
            re = np.bincount(inv, weights=coeffs.real, minlength=len(uniq))
            im = np.bincount(inv, weights=coeffs.imag, minlength=len(uniq))
            values = re + 1j * im
            keep = values != 0
            freqs, coeffs = uniq[keep], values[keep]

        freqs.setflags(write=False)
        coeffs.setflags(write=False)
        object.__setattr__(self, "freqs", freqs)
        object.__setattr__(self, "coeffs", coeffs)

    # --- конструкторы ---

    @classmethod
    def zero(cls, d: int) -> "TrigPoly":
        return cls(d, np.zeros((0, d), dtype=np.int64), np.zeros(0, dtype=np.complex128))

    @classmethod
    def constant(cls, d: int, value: complex = 1.0) -> "TrigPoly":
        return cls(d, np.zeros((1, d), dtype=np.int64), [value])

    @classmethod
    def monomial(cls, k: Sequence[int], value: complex = 1.0) -> "TrigPoly":
        k = tuple(int(x) for x in k)
        return cls(len(k), [k], [value])

    @classmethod
    def from_dict(cls, d: int, mapping: Mapping[FreqIndex, complex]) -> "TrigPoly":
        if not mapping:
            return cls.zero(d)
        keys = list(mapping.keys())
        return cls(d, np.array(keys, dtype=np.int64).reshape(-1, d),
                   [mapping[key] for key in keys])

    @classmethod
    def from_dense(cls, box: np.ndarray, offsets: Sequence[int]) -> "TrigPoly":
        """
        Полином из плотного массива коэффициентов

        Args:
            box: Массив коэффициентов, box[idx] - коэффициент частоты idx + offsets
            offsets: Наименьшая частота по каждой оси
        """
        box = np.asarray(box, dtype=np.complex128)
        d = box.ndim
        nz = np.nonzero(box)
        freqs = np.stack(nz, axis=-1).astype(np.int64) + np.asarray(offsets, dtype=np.int64)
        return cls(d, freqs.reshape(-1, d), box[nz])

    # --- доступ ---

    def __len__(self) -> int:
        return len(self.coeffs)

    @property
    def is_zero(self) -> bool:
        return len(self.coeffs) == 0

    def coeff(self, k: Sequence[int]) -> complex:
        """Коэффициент при частоте k (0, если частоты нет)"""
        k = np.asarray(k, dtype=np.int64).reshape(self.d)
        if self.is_zero:
            return 0j
        hit = np.nonzero(np.all(self.freqs == k, axis=1))[0]
        return complex(self.coeffs[hit[0]]) if len(hit) else 0j

    def to_dict(self) -> Dict[FreqIndex, complex]:
        return {tuple(int(x) for x in k): complex(c) for k, c in zip(self.freqs, self.coeffs)}

    def bandwidth(self) -> Tuple[int, ...]:
        """Наибольший модуль частоты по каждой оси"""
        if self.is_zero:
            return (0,) * self.d
        return tuple(int(x) for x in np.abs(self.freqs).max(axis=0))

    def l2_norm(self) -> float:
        """Норма L_2 по нормированной мере (равенство Парсеваля)"""
        return float(np.sqrt(np.sum(np.abs(self.coeffs) ** 2)))

    def evaluate(self, x) -> np.ndarray:
        """
        Прямое вычисление суммы sum_k c_k e^{i(k,x)}

        Args:
            x: Точки формы (..., d)

        Returns:
            Комплексные значения формы (...)
        """
        x = np.asarray(x, dtype=np.float64)
        if self.d == 1 and (x.ndim == 0 or x.shape[-1] != 1):
            x = x[..., None]
        shape = x.shape[:-1]
        pts = x.reshape(-1, self.d)
        out = np.zeros(len(pts), dtype=np.complex128)
        chunk = max(1, (1 << 22) // max(len(self.coeffs), 1))
        for start in range(0, len(pts), chunk):
            phase = pts[start:start + chunk] @ self.freqs.T.astype(np.float64)
            out[start:start + chunk] = np.exp(1j * phase) @ self.coeffs
        return out.reshape(shape)

    def scale_coeffs(self, factors: np.ndarray) -> "TrigPoly":
        """Покомпонентное умножение коэффициентов на множители"""
        return TrigPoly(self.d, self.freqs, self.coeffs * np.asarray(factors))

    # --- арифметика ---

    def _check_same_d(self, other: "TrigPoly") -> None:
        if other.d != self.d:
            raise ParameterError(f"Размерности не совпадают: {self.d} и {other.d}")

    def __add__(self, other: "TrigPoly") -> "TrigPoly":
        self._check_same_d(other)
        return TrigPoly(self.d, np.concatenate([self.freqs, other.freqs]),
                        np.concatenate([self.coeffs, other.coeffs]))

    def __neg__(self) -> "TrigPoly":
        return TrigPoly(self.d, self.freqs, -self.coeffs)

    def __sub__(self, other: "TrigPoly") -> "TrigPoly":
        return self + (-other)

    def __mul__(self, scalar: complex) -> "TrigPoly":
        return TrigPoly(self.d, self.freqs, self.coeffs * complex(scalar))

    __rmul__ = __mul__

    # --- сериализация ---

    def to_json(self) -> str:
        return json.dumps({
            "d": self.d,
            "coeffs": [{"k": [int(x) for x in k], "re": float(c.real), "im": float(c.imag)}
                       for k, c in zip(self.freqs, self.coeffs)],
        })

    @classmethod
    def from_json(cls, text: str) -> "TrigPoly":
        data = json.loads(text)
        d = int(data["d"])
        items = data.get("coeffs", [])
        if not items:
            return cls.zero(d)
        freqs = np.array([item["k"] for item in items], dtype=np.int64).reshape(-1, d)
        coeffs = np.array([complex(item["re"], item["im"]) for item in items])
        return cls(d, freqs, coeffs)

    def __repr__(self) -> str:
        return f"TrigPoly(d={self.d}, terms={len(self)}, bandwidth={self.bandwidth()})"


def tensor_product(factors: Sequence[TrigPoly]) -> TrigPoly:
    """
    Тензорное произведение одномерных полиномов f_1(x_1)...f_d(x_d)

    Args:
        factors: Одномерные полиномы по осям

    Returns:
        d-мерный полином
    """
    if any(f.d != 1 for f in factors):
        raise ParameterError("Тензорное произведение строится из одномерных полиномов")
    d = len(factors)
    if any(f.is_zero for f in factors):
        return TrigPoly.zero(d)
    grids = np.meshgrid(*[f.freqs[:, 0] for f in factors], indexing="ij")
    freqs = np.stack([g.reshape(-1) for g in grids], axis=-1)
    values = factors[0].coeffs
    for f in factors[1:]:
        values = np.multiply.outer(values, f.coeffs)
    return TrigPoly(d, freqs, values.reshape(-1))


@dataclass(frozen=True)
class DyadicGrid:
    """
    Тензорная двоичная сетка уровня j: по оси i узлы x_k = pi*k/2^{j_i-1},
    k из A_{j_i}, всего 2^{j_i} узлов в [-pi, pi)
    """
    j: LevelVec

    def __post_init__(self):
        object.__setattr__(self, "j", as_level(self.j))

    @property
    def d(self) -> int:
        return len(self.j)

    @property
    def shape(self) -> Tuple[int, ...]:
        return tuple(1 << ji for ji in self.j)

    @property
    def size(self) -> int:
        return int(np.prod(self.shape))

    def indices(self, axis: int) -> np.ndarray:
        """Индексы k из A_j по оси в порядке возрастания"""
        n = 1 << self.j[axis]
        return np.arange(-(n >> 1), n - (n >> 1), dtype=np.int64)

    def nodes(self, axis: int) -> np.ndarray:
        n = 1 << self.j[axis]
        return 2.0 * np.pi * self.indices(axis) / n

    def points(self) -> np.ndarray:
        """Узлы сетки формы (*shape, d)"""
        axes = np.meshgrid(*[self.nodes(i) for i in range(self.d)], indexing="ij")
        return np.stack(axes, axis=-1)


def sample_nodes(j: Sequence[int]) -> Tuple[np.ndarray, ...]:
    """Координаты узлов по осям для сетки уровня j"""
    grid = DyadicGrid(as_level(j))
    return tuple(grid.nodes(i) for i in range(grid.d))


def eval_on_grid(f: TrigPoly, grid: DyadicGrid) -> np.ndarray:
    """
    Значения полинома во всех узлах двоичной сетки

    Частота k попадает в ячейку k mod 2^{j_i}, затем выполняется
    обратное БПФ по осям.

    Args:
        f: Полином
        grid: Сетка той же размерности

    Returns:
        Комплексный тензор формы grid.shape
    """
    if f.d != grid.d:
        raise ShapeMismatchError(f"Размерность полинома {f.d} не совпадает с сеткой {grid.d}")
    if grid.size > MAX_GRID_POINTS:
        raise ShapeMismatchError(f"Сетка {grid.shape} превышает допустимый размер")
    shape = grid.shape
    bins = np.zeros(shape, dtype=np.complex128)
    if not f.is_zero:
        idx = np.mod(f.freqs, np.asarray(shape, dtype=np.int64))
        np.add.at(bins, tuple(idx.T), f.coeffs)
    values = scipy.fft.ifftn(bins, norm="forward")
    return scipy.fft.fftshift(values)


def grid_to_coeffs(values: np.ndarray, j: Sequence[int]) -> TrigPoly:
    """
    Интерполяционный полином с частотами из A_{j_1} x ... x A_{j_d}

    Args:
        values: Значения в узлах сетки уровня j
        j: Уровень

    Returns:
        Полином, обратный к eval_on_grid на этом пространстве
    """
    j = as_level(j)
    values = np.asarray(values, dtype=np.complex128)
    grid = DyadicGrid(j)
    if values.shape != grid.shape:
        raise ShapeMismatchError(
            f"Форма значений {values.shape} не соответствует уровню {j} (ожидается {grid.shape})")
    coeffs = scipy.fft.fftn(scipy.fft.ifftshift(values), norm="forward")
    box = scipy.fft.fftshift(coeffs)
    offsets = [-(n >> 1) for n in grid.shape]
    return TrigPoly.from_dense(box, offsets)


def dyadic_block(j: Sequence[int]) -> FrozenSet[FreqIndex]:
    """
    Двоичный блок floor(2^{j_i-1}) <= |k_i| < 2^{j_i} по всем осям

    Args:
        j: Уровень

    Returns:
        Множество частот блока
    """
    j = as_level(j)
    axes = []
    for ji in j:
        if ji == 0:
            axes.append([0])
        else:
            pos = list(range(1 << (ji - 1), 1 << ji))
            axes.append([-k for k in reversed(pos)] + pos)
    return frozenset(itertools.product(*axes))


def hyperbolic_cross(n: int, d: int) -> FrozenSet[FreqIndex]:
    """
    Ступенчатый гиперболический крест Q_n: объединение блоков с |j|_1 <= n

    Args:
        n: Порядок креста
        d: Размерность

    Returns:
        Множество частот
    """
    if n < 0:
        raise ParameterError(f"Порядок креста должен быть >= 0, получено {n}")
    result = set()
    for j in itertools.product(range(n + 1), repeat=d):
        if sum(j) <= n:
            result.update(dyadic_block(j))
    return frozenset(result)


def in_hyperbolic_cross(freqs: np.ndarray, n: int) -> np.ndarray:
    """Маска принадлежности частот кресту Q_n"""
    freqs = np.asarray(freqs, dtype=np.int64)
    return block_level(freqs).sum(axis=-1) <= n


@dataclass(frozen=True)
class SpectralFunction:
    """
    Функция, заданная правилом для коэффициентов Фурье. Коэффициенты
    с max|k_i| > bandwidth считаются нулевыми; tail - норма L_2
    отброшенной части.

    Для разделимых функций f(x) = f_1(x_1)...f_d(x_d) задаются одномерные
    правила factors, для остальных - общее правило coeff на массиве частот (M, d).
    """
    d: int
    bandwidth: Optional[int]
    tail: float = 0.0
    factors: Optional[Tuple[Callable[[np.ndarray], np.ndarray], ...]] = None
    coeff: Optional[Callable[[np.ndarray], np.ndarray]] = None

    def __post_init__(self):
        if self.factors is not None:
            object.__setattr__(self, "factors", tuple(self.factors))
            if len(self.factors) != self.d:
                raise ParameterError(
                    f"Число одномерных правил ({len(self.factors)}) не равно d={self.d}")
        elif self.coeff is None:
            raise ModelError("Спектральная модель требует factors или coeff")

    @property
    def is_separable(self) -> bool:
        return self.factors is not None

    def require_bandwidth(self) -> int:
        if self.bandwidth is None:
            raise ModelError("Спектральная модель без ширины полосы не может быть обработана")
        return int(self.bandwidth)

    @cached_property
    def axis_polys(self) -> Tuple[TrigPoly, ...]:
        """Одномерные усеченные полиномы f_i (только для разделимых моделей)"""
        if not self.is_separable:
            raise ModelError("Модель не является разделимой")
        band = self.require_bandwidth()
        k = np.arange(-band, band + 1, dtype=np.int64)
        return tuple(TrigPoly(1, k, np.asarray(rule(k), dtype=np.complex128))
                     for rule in self.factors)

    def coefficients_at(self, freqs: np.ndarray) -> np.ndarray:
        """Коэффициенты усеченной модели на массиве частот (M, d)"""
        band = self.require_bandwidth()
        freqs = np.asarray(freqs, dtype=np.int64).reshape(-1, self.d)
        inside = np.all(np.abs(freqs) <= band, axis=1)
        out = np.zeros(len(freqs), dtype=np.complex128)
        if not inside.any():
            return out
        rows = freqs[inside]
        if self.is_separable:
            values = np.ones(len(rows), dtype=np.complex128)
            for i, rule in enumerate(self.factors):
                values = values * np.asarray(rule(rows[:, i]), dtype=np.complex128)
        else:
            values = np.asarray(self.coeff(rows), dtype=np.complex128)
        out[inside] = values
        return out

    def norm_sq(self) -> float:
        """Квадрат нормы L_2 усеченной модели"""
        if self.is_separable:
            return float(np.prod([np.sum(np.abs(p.coeffs) ** 2) for p in self.axis_polys]))
        return self.to_trigpoly().l2_norm() ** 2

    def to_trigpoly(self, max_terms: int = 1 << 22) -> TrigPoly:
        """Явный полином на кубе |k_i| <= bandwidth"""
        band = self.require_bandwidth()
        if self.is_separable:
            return tensor_product(self.axis_polys)
        if (2 * band + 1) ** self.d > max_terms:
            raise ModelError(
                f"Куб частот ({2 * band + 1})^{self.d} слишком велик для явного построения")
        axis = np.arange(-band, band + 1, dtype=np.int64)
        grids = np.meshgrid(*([axis] * self.d), indexing="ij")
        freqs = np.stack([g.reshape(-1) for g in grids], axis=-1)
        return TrigPoly(self.d, freqs, self.coefficients_at(freqs))


@dataclass(frozen=True)
class PointwiseFunction:
    """Функция, доступная только значениями в точках формы (..., d)"""
    d: int
    func: Callable[[np.ndarray], np.ndarray]
    label: str = "pointwise"

    def __call__(self, x: np.ndarray) -> np.ndarray:
        return np.asarray(self.func(np.asarray(x, dtype=np.float64)), dtype=np.complex128)


FunctionModel: TypeAlias = Union[TrigPoly, SpectralFunction, PointwiseFunction]
