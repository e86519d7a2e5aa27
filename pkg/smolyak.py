"""
Смешанные разности Delta_j^Q, оператор Смоляка T_n^Q в прямой форме и
в форме комбинационной техники, учет узлов разреженной сетки.
"""

import itertools
import json
import logging
import threading
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Dict, FrozenSet, List, Optional, Sequence, Tuple

from scipy.special import comb

from fourier_core import (
    FunctionModel,
    LevelVec,
    ParameterError,
    SpectralFunction,
    TrigPoly,
    tensor_product,
)
from operators import QuasiInterpOp, apply, level_operator

logger = logging.getLogger(__name__)


def level_vectors(m: int, d: int) -> List[LevelVec]:
    """Все j из Z_+^d с |j|_1 = m в лексикографическом порядке"""
    if m < 0:
        return []
    if d == 1:
        return [(m,)]
    result = []
    for first in range(m + 1):
        for rest in level_vectors(m - first, d - 1):
            result.append((first,) + rest)
    return result


@dataclass(frozen=True)
class PlanTerm:
    j: LevelVec
    c: int


@dataclass(frozen=True)
class SmolyakPlan:
    """Уровни j комбинационной техники с целыми коэффициентами c_j"""
    n: int
    d: int
    terms: Tuple[PlanTerm, ...]

    def to_json(self) -> str:
        return json.dumps([{"j": list(t.j), "c": t.c} for t in self.terms])

    def coefficient_sum(self) -> int:
        return sum(t.c for t in self.terms)


def combination_plan(n: int, d: int) -> SmolyakPlan:
    """
    Коэффициенты (-1)^{n-|j|_1} C(d-1, n-|j|_1) для max(0, n-d+1) <= |j|_1 <= n

    Args:
        n: Порядок
        d: Размерность

    Returns:
        SmolyakPlan с термами, упорядоченными лексикографически по j
    """
    if n < 0:
        raise ParameterError(f"Порядок должен быть >= 0, получено {n}")
    terms = []
    for m in range(max(0, n - d + 1), n + 1):
        c = (-1) ** (n - m) * int(comb(d - 1, n - m, exact=True))
        terms.extend(PlanTerm(j, c) for j in level_vectors(m, d))
    terms.sort(key=lambda t: t.j)
    return SmolyakPlan(n=n, d=d, terms=tuple(terms))


def pairwise_sum(polys: Sequence[TrigPoly], d: int) -> TrigPoly:
    """Сумма полиномов по детерминированному бинарному дереву"""
    if not polys:
        return TrigPoly.zero(d)
    items = list(polys)
    while len(items) > 1:
        paired = [items[i] + items[i + 1] for i in range(0, len(items) - 1, 2)]
        if len(items) % 2:
            paired.append(items[-1])
        items = paired
    return items[0]


class LevelEvaluator:
    """
    Кэш значений Q_j f по уровням. Для разделимых спектральных функций
    Q_j f собирается тензорным произведением одномерных Q_{j_i} f_i.
    """

    def __init__(self, op: QuasiInterpOp, f: FunctionModel, path: str = "aliasing"):
        self.op = op
        self.f = f
        self.path = path
        self._levels: Dict[LevelVec, TrigPoly] = {}
        self._axes: Dict[Tuple[int, int], TrigPoly] = {}
        self._lock = threading.Lock()
        self.separable = isinstance(f, SpectralFunction) and f.is_separable

    def axis(self, i: int, level: int) -> TrigPoly:
        """Одномерный Q_level f_i (нулевой полином при level = -1)"""
        key = (i, level)
        with self._lock:
            cached = self._axes.get(key)
        if cached is not None:
            return cached
        if level < 0:
            result = TrigPoly.zero(1)
        else:
            result = apply(self.op.univariate(), self.f.axis_polys[i], (level,), self.path)
        with self._lock:
            self._axes[key] = result
        return result

    def __call__(self, j: Sequence[int]) -> TrigPoly:
        j = tuple(int(x) for x in j)
        with self._lock:
            cached = self._levels.get(j)
        if cached is not None:
            return cached
        if self.separable:
            if any(x < 0 for x in j):
                result = TrigPoly.zero(self.op.d)
            else:
                result = tensor_product([self.axis(i, ji) for i, ji in enumerate(j)])
        else:
            result = level_operator(self.op, self.f, j, self.path)
        with self._lock:
            self._levels[j] = result
        return result

    def axis_difference(self, i: int, level: int) -> TrigPoly:
        """Одномерная разность Q_level f_i - Q_{level-1} f_i"""
        return self.axis(i, level) - self.axis(i, level - 1)


def mixed_difference(op: QuasiInterpOp, f: FunctionModel, j: Sequence[int],
                     path: str = "aliasing",
                     evaluator: Optional[LevelEvaluator] = None) -> TrigPoly:
    """
    Delta_j f = sum по b из {-1,0}^d знакопеременных Q_{j+b} f, Q_{-1} = 0

    Args:
        op: Оператор
        f: Модель функции
        j: Уровень
        path: sampled или aliasing
        evaluator: Общий кэш уровней

    Returns:
        Полином Delta_j f
    """
    j = tuple(int(x) for x in j)
    if len(j) != op.d:
        raise ParameterError(f"Уровень {j} не согласован с d={op.d}")
    evaluator = evaluator or LevelEvaluator(op, f, path)
    if evaluator.separable:
        return tensor_product([evaluator.axis_difference(i, ji) for i, ji in enumerate(j)])
    parts = []
    for b in itertools.product((-1, 0), repeat=op.d):
        level = tuple(ji + bi for ji, bi in zip(j, b))
        sign = (-1) ** sum(1 for bi in b if bi)
        term = evaluator(level)
        parts.append(term if sign > 0 else -term)
    return pairwise_sum(parts, op.d)


def smolyak_apply(op: QuasiInterpOp, f: FunctionModel, n: int, mode: str = "combination",
                  path: str = "sampled", jobs: int = 1) -> TrigPoly:
    """
    Оператор Смоляка T_n f = sum_{|j|_1 <= n} Delta_j f

    Args:
        op: Оператор
        f: Модель функции
        n: Порядок
        mode: combination (по плану) или direct (сумма смешанных разностей)
        path: sampled или aliasing
        jobs: Число потоков для независимых уровней

    Returns:
        Полином T_n f
    """
    if n < 0:
        raise ParameterError(f"Порядок должен быть >= 0, получено {n}")
    evaluator = LevelEvaluator(op, f, path)

    if mode == "combination":
        plan = combination_plan(n, op.d)

        def term(t: PlanTerm) -> TrigPoly:
            return evaluator(t.j) * t.c
        units = plan.terms
    elif mode == "direct":
        def term(j: LevelVec) -> TrigPoly:
            return mixed_difference(op, f, j, path, evaluator)
        units = tuple(j for m in range(n + 1) for j in level_vectors(m, op.d))
    else:
        raise ParameterError(f"Неизвестный режим: {mode}")

    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            parts = list(pool.map(term, units))
    else:
        parts = [term(u) for u in units]
    logger.debug(f"T_{n} ({mode}, {path}): {len(units)} слагаемых")
    return pairwise_sum(parts, op.d)


def _new_points(level: int) -> int:
    return 1 if level == 0 else 1 << (level - 1)


def smolyak_grid_size(n: int, d: int) -> int:
    """
    Число различных узлов объединения сеток уровня |j|_1 <= n

    Args:
        n: Порядок
        d: Размерность

    Returns:
        Число узлов
    """
    if n < 0:
        raise ParameterError(f"Порядок должен быть >= 0, получено {n}")
    total = 0
    for m in range(n + 1):
        for j in level_vectors(m, d):
            count = 1
            for ji in j:
                count *= _new_points(ji)
            total += count
    return total


def smolyak_grid_points(n: int, d: int) -> FrozenSet[Tuple[int, ...]]:
    """Явное объединение узлов; узел k уровня l имеет индекс k 2^{n-l} на решетке уровня n"""
    points = set()
    for m in range(n + 1):
        for j in level_vectors(m, d):
            axes = []
            for ji in j:
                size = 1 << ji
                axes.append([k << (n - ji) for k in range(-(size >> 1), size - (size >> 1))])
            points.update(itertools.product(*axes))
    return frozenset(points)


def c0_of_smolyak(op: QuasiInterpOp, f: TrigPoly, n: int) -> complex:
    """Нулевой коэффициент Фурье T_n f, вычисленный точно по формуле наложения"""
    result = smolyak_apply(op, f, n, mode="combination", path="aliasing")
    return result.coeff((0,) * op.d)
