"""
Тестовые функции (Phi_j, лакунарные f_n, функции Коробова, ступенчатый
сигнал), измерение ошибки оператора Смоляка, подгонка скорости сходимости
и теоретические показатели скорости.
"""

import itertools
import logging
import math
import time
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy.special import comb, zeta

from fourier_core import (
    FunctionModel,
    HypercrossError,
    ParameterError,
    SpectralFunction,
    TrigPoly,
    as_level,
    tensor_product,
)
from kernels import AveragerFamily
from operators import QuasiInterpOp, apply, named_operator
from smolyak import c0_of_smolyak, smolyak_apply, smolyak_grid_size
from spaces import (
    NormFamily,
    ResolutionOfUnity,
    block_norms,
    check_cond,
    lq_distance,
    model_lq_norm,
    modulus2,
)

logger = logging.getLogger(__name__)

# Хвост усечения не должен превышать этой доли измеренной ошибки
TAIL_FRACTION = 0.01

CSV_COLUMNS = ["label", "op", "d", "n", "q", "error", "dof", "tail", "wallclock_ms"]


class RateFitError(HypercrossError):
    """Недостаточно надежных точек для подгонки скорости"""
    pass


@dataclass(frozen=True)
class Membership:
    """Заявленная принадлежность пространству и ее обоснование"""
    family: str
    p: float
    theta: float
    r: float
    note: str = ""


@dataclass(frozen=True)
class BenchFunction:
    model: FunctionModel
    label: str
    claimed_membership: Optional[Membership] = None

    @property
    def tail(self) -> float:
        return self.model.tail if isinstance(self.model, SpectralFunction) else 0.0

    @property
    def d(self) -> int:
        return self.model.d


def phi_j(j: Sequence[int], phi: ResolutionOfUnity) -> BenchFunction:
    """
    Phi_j(x) = sum_k phi_{j_1}(k_1)...phi_{j_d}(k_d) e^{i(k,x)}

    Args:
        j: Уровень
        phi: Разбиение единицы

    Returns:
        BenchFunction с точным полиномом
    """
    j = as_level(j)
    factors = []
    for ji in j:
        reach = 1 << (ji + 1)
        k = np.arange(-reach, reach + 1, dtype=np.int64)
        factors.append(TrigPoly(1, k, phi.phi(ji, k)))
    return BenchFunction(model=tensor_product(factors), label=f"Phi_{list(j)}")


def f_lower(n: int, xi: int, d: int) -> BenchFunction:
    """
    Лакунарный полином f_n = sum e^{i(2^{u_1} x_1 + ... + 2^{u_d} x_d)}
    по |u|_1 = n + d xi, u_i >= xi + 1

    Args:
        n: Порядок
        xi: Сдвиг из условия (cond)
        d: Размерность

    Returns:
        BenchFunction с единичными коэффициентами
    """
    if n < d or xi < 0:
        raise ParameterError(f"Требуется n >= d и xi >= 0, получено n={n}, xi={xi}, d={d}")
    total = n + d * xi
    freqs = []
    for u in itertools.product(range(xi + 1, total + 1), repeat=d):
        if sum(u) == total:
            freqs.append([1 << ui for ui in u])
    poly = TrigPoly(d, np.array(freqs, dtype=np.int64).reshape(-1, d), np.ones(len(freqs)))
    return BenchFunction(model=poly, label=f"f_lower(n={n},xi={xi})")


def f_lower_for(avg: AveragerFamily, n: int, d: int) -> BenchFunction:
    """f_n с xi, найденным проверкой условия для усреднения"""
    pattern = check_cond(avg)
    if pattern is None:
        raise ParameterError(f"Усреднение {avg.name} не удовлетворяет условию (cond)")
    return f_lower(n, pattern.xi, d)


def korobov(a: float, d: int, bandwidth: int = 4096) -> BenchFunction:
    """
    Функция с коэффициентами prod_i max(1, |k_i|)^{-a}, усеченная при |k_i| <= bandwidth

    Args:
        a: Показатель убывания, a > 1/2
        d: Размерность
        bandwidth: Граница усечения по каждой оси

    Returns:
        BenchFunction с разделимой спектральной моделью и хвостом Парсеваля
    """
    if a <= 0.5:
        raise ParameterError(f"Требуется a > 1/2, получено {a}")

    def rule(k):
        return np.maximum(1.0, np.abs(np.asarray(k, dtype=np.float64))) ** (-a)

    axis_total = 1.0 + 2.0 * float(zeta(2 * a, 1))
    axis_tail = 2.0 * float(zeta(2 * a, bandwidth + 1))
    tail = math.sqrt(max(axis_total ** d - (axis_total - axis_tail) ** d, 0.0))
    model = SpectralFunction(d=d, bandwidth=bandwidth, tail=tail, factors=(rule,) * d)
    membership = Membership("B", 2.0, math.inf, a - 0.5,
                            "блоки: ||delta_m f||_2 ~ 2^{-(a-1/2)m} по каждой оси")
    return BenchFunction(model=model, label=f"korobov(a={a})", claimed_membership=membership)


def step_signal(d: int, bandwidth: int = 4095) -> BenchFunction:
    """
    Тензорное произведение прямоугольных волн sign(sin x_i):
    f^(k) = 2/(i pi k) для нечетных k, 0 для четных

    Args:
        d: Размерность
        bandwidth: Граница усечения по каждой оси

    Returns:
        BenchFunction со спектральной моделью
    """
    def rule(k):
        k = np.asarray(k, dtype=np.int64)
        out = np.zeros(k.shape, dtype=np.complex128)
        odd = (k % 2) != 0
        out[odd] = 2.0 / (1j * np.pi * k[odd])
        return out

    # sum_{|k| нечетные} 4/(pi k)^2 = 1; хвост через дзета-функцию Гурвица
    first_odd = bandwidth + 1 if bandwidth % 2 == 0 else bandwidth + 2
    axis_tail = 2.0 * 4.0 / np.pi ** 2 * float(zeta(2, first_odd / 2.0)) / 4.0
    tail = math.sqrt(max(1.0 - (1.0 - axis_tail) ** d, 0.0))
    model = SpectralFunction(d=d, bandwidth=bandwidth, tail=tail, factors=(rule,) * d)
    membership = Membership("B", 1.0, math.inf, 1.0, "скачок: ||Delta_h f||_1 ~ h")
    return BenchFunction(model=model, label="step", claimed_membership=membership)


def random_trig_poly(d: int, bandwidth: int, rng: np.random.Generator, terms: int = 24) -> TrigPoly:
    """Случайный полином с частотами в [-bandwidth, bandwidth]^d"""
    freqs = rng.integers(-bandwidth, bandwidth + 1, size=(terms, d))
    coeffs = rng.standard_normal(terms) + 1j * rng.standard_normal(terms)
    return TrigPoly(d, freqs, coeffs)


@dataclass
class ErrorRecord:
    label: str
    op: str
    d: int
    n: int
    q: float
    error: float
    dof: int
    tail: float
    wallclock_ms: float
    reliable: bool = True

    def to_row(self) -> Dict[str, Any]:
        return {
            "label": self.label,
            "op": self.op,
            "d": self.d,
            "n": self.n,
            "q": "inf" if math.isinf(self.q) else self.q,
            "error": repr(self.error),
            "dof": self.dof,
            "tail": repr(self.tail),
            "wallclock_ms": round(self.wallclock_ms, 3),
        }


def measure_error(op: QuasiInterpOp, f: BenchFunction, n: int, q: float,
                  path: str = "sampled", mode: str = "combination") -> ErrorRecord:
    """
    Ошибка ||f_trunc - T_n f||_q оператора Смоляка

    Args:
        op: Оператор
        f: Тестовая функция
        n: Порядок
        q: Показатель нормы
        path: sampled или aliasing
        mode: combination или direct

    Returns:
        ErrorRecord; reliable=False, если хвост усечения >= 1% ошибки
    """
    started = time.perf_counter()
    approx = smolyak_apply(op, f.model, n, mode=mode, path=path)
    error = lq_distance(f.model, approx, q)
    elapsed = (time.perf_counter() - started) * 1000.0
    tail = f.tail
    reliable = tail <= TAIL_FRACTION * error or tail == 0.0
    logger.info(f"{f.label}, {op.name}, n={n}, q={q}: ошибка {error:.4e} за {elapsed:.0f} мс")
    if not reliable:
        logger.warning(f"{f.label}, n={n}: хвост {tail:.3g} сравним с ошибкой {error:.3g}")
    return ErrorRecord(label=f.label, op=op.name, d=op.d, n=n, q=q, error=error,
                       dof=smolyak_grid_size(n, op.d), tail=tail, wallclock_ms=elapsed,
                       reliable=reliable)


@dataclass
class RateFit:
    """Модель log2 e_n = c - r n + beta log2 n"""
    rate: float
    beta: float
    constant: float
    residual_rms: float
    n_values: List[int] = field(default_factory=list)

    def to_dict(self) -> Dict[str, Any]:
        return {"rate": self.rate, "beta": self.beta, "constant": self.constant,
                "residual_rms": self.residual_rms, "n_values": self.n_values}


def fit_rate(records: Sequence[ErrorRecord], drop_smallest: int = 2) -> RateFit:
    """
    Подгонка r, beta, C методом наименьших квадратов

    Args:
        records: Записи с различными n
        drop_smallest: Число отбрасываемых наименьших n (предасимптотика)

    Returns:
        RateFit
    """
    usable = sorted(records, key=lambda rec: rec.n)[drop_smallest:]
    if len({rec.n for rec in usable}) != len(usable):
        raise RateFitError("Значения n в записях повторяются")
    if len(usable) < 4:
        raise RateFitError(f"Для подгонки нужно не менее 4 точек, получено {len(usable)}")
    for rec in usable:
        if rec.n < 1 or rec.error <= 0:
            raise RateFitError(f"Запись n={rec.n} непригодна для логарифмической модели")
        if rec.error <= 10.0 * rec.tail:
            raise RateFitError(f"Ошибка при n={rec.n} не превышает 10 хвостов усечения")
    n = np.array([rec.n for rec in usable], dtype=np.float64)
    y = np.log2([rec.error for rec in usable])
    design = np.column_stack([np.ones_like(n), -n, np.log2(n)])
    solution, _, rank, _ = np.linalg.lstsq(design, y, rcond=None)
    if rank < 3:
        raise RateFitError("Вырожденная матрица плана подгонки")
    c, rate, beta = (float(v) for v in solution)
    residual = float(np.sqrt(np.mean((design @ solution - y) ** 2)))
    return RateFit(rate=rate, beta=beta, constant=2.0 ** c, residual_rms=residual,
                   n_values=[int(v) for v in n])


@dataclass(frozen=True)
class Prediction:
    """Предсказанная асимптотика 2^{-rate n} n^{log_power}"""
    rate: float
    log_power: float
    source: str


def _positive(x: float) -> float:
    return max(x, 0.0)


def predicted_rate(kind: str, p: float, q: float, theta: float, r: float, d: int,
                   family: str = "B") -> Prediction:
    """
    Показатели скорости из теорем об ошибке

    Args:
        kind: quasi (операторы Q), sampling (I_j), convolution (V_j)
        p, q, theta, r: Параметры класса и нормы ошибки
        d: Размерность
        family: B или F

    Returns:
        Prediction
    """
    family = NormFamily(family)
    inv = (lambda x: 0.0 if math.isinf(x) else 1.0 / x)
    if kind == "sampling":
        if q != p:
            raise ParameterError("Для оператора отсчетов таблица задана при q = p")
        return Prediction(r, (d - 1) * (1 - inv(theta)), "sampling")
    if kind == "convolution":
        if q != p:
            raise ParameterError("Для свертки таблица задана при q = p")
        if p <= 2 and p <= theta:
            power = (d - 1) * (inv(p) - inv(theta))
        elif p > 2 and theta > 2:
            power = (d - 1) * (0.5 - inv(theta))
        else:
            power = 0.0
        return Prediction(r, power, "convolution")
    if kind != "quasi":
        raise ParameterError(f"Неизвестный тип предсказания: {kind}")
    if q <= p:
        return Prediction(r, (d - 1) * (1 - inv(theta)), f"{family.value}: q <= p")
    if math.isinf(q):
        power = (d - 1) * (1 - inv(theta)) if family is NormFamily.B else (d - 1) * (1 - inv(p))
        return Prediction(r - inv(p), power, f"{family.value}: q = inf")
    if family is NormFamily.B:
        return Prediction(r - inv(p) + inv(q), (d - 1) * _positive(inv(q) - inv(theta)),
                          "B: p < q < inf")
    return Prediction(r - inv(p) + inv(q), 0.0, "F: p < q < inf")


@dataclass(frozen=True)
class EquivalencePoint:
    j: int
    error: float
    modulus: float

    @property
    def ratio(self) -> float:
        return self.error / self.modulus if self.modulus > 0 else math.inf


def kantorovich_equivalence(f: BenchFunction, levels: Sequence[int], p: float,
                            op: Optional[QuasiInterpOp] = None,
                            path: str = "aliasing") -> List[EquivalencePoint]:
    """
    Отношения ||f - K_j f||_p / omega_2(f, 2^{-j})_p по уровням

    Args:
        f: Одномерная тестовая функция
        levels: Уровни j
        p: Показатель нормы
        op: Оператор Канторовича (по умолчанию K с sigma = 2)
        path: Путь вычисления K_j

    Returns:
        Точки с ошибкой, модулем гладкости и отношением
    """
    op = op or named_operator("K", d=1, sigma=2)
    points = []
    for j in levels:
        approx = apply(op, f.model, (j,), path)
        error = lq_distance(f.model, approx, p)
        omega = modulus2(f.model, 2.0 ** (-j), p)
        points.append(EquivalencePoint(j=j, error=error, modulus=omega))
        logger.debug(f"{f.label}, j={j}: ошибка {error:.3e}, модуль {omega:.3e}")
    return points


def sharpness_table(op: QuasiInterpOp, ns: Sequence[int], scale: float = 1.0) -> List[Tuple[int, complex, float]]:
    """
    c_0(T_n f_n) и ожидаемое lambda^d C(n-1, d-1) по n

    Args:
        op: Оператор
        ns: Значения n
        scale: Множитель при f_n

    Returns:
        Список (n, c_0, ожидаемое значение)
    """
    pattern = check_cond(op.avg)
    if pattern is None:
        raise ParameterError(f"Усреднение {op.avg.name} не удовлетворяет условию (cond)")
    rows = []
    for n in ns:
        witness = f_lower(n, pattern.xi, op.d).model * scale
        c0 = c0_of_smolyak(op, witness, n)
        expected = scale * pattern.lam ** op.d * float(comb(n - 1, op.d - 1, exact=True))
        rows.append((n, c0, expected))
    return rows


def block_sweep(f: BenchFunction, phi: ResolutionOfUnity, p: float = 2.0) -> np.ndarray:
    """Нормы одномерных блоков ||delta_m f||_p для проверки заявленной гладкости"""
    return block_norms(f.model, p, phi)


def exact_norm(f: BenchFunction, q: float) -> float:
    """||f_trunc||_q"""
    return model_lq_norm(f.model, q)
