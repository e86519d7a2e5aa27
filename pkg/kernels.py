"""
Символы Фурье ядер восстановления phi_j и усредняющих функций phi~_j
по уровням: ядра Валле Пуссена, Дирихле, модифицированные ядра,
характеристические и дельта-усреднения, решатель коэффициентов сдвига.
"""

import logging
import math
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Any, Callable, Mapping, Optional, Tuple

import numpy as np
from scipy.special import factorial

from fourier_core import HypercrossError, ParameterError

logger = logging.getLogger(__name__)

# Уровень шума, ниже которого дефект 1 - phi*phi~ считается нулевым
DEFECT_FLOOR = 1e-14


class ShiftSystemError(HypercrossError):
    """Вырожденная система для коэффициентов сдвига"""
    pass


class AveragerKind(Enum):
    """Тип усредняющей функции"""
    FUNCTION = "function"
    DELTA = "delta"
    DELTA_COMBINATION = "delta_combination"


def _as_freq(k) -> np.ndarray:
    return np.asarray(k, dtype=np.int64)


def _finish(out: np.ndarray, scalar: bool):
    return complex(out) if scalar else out


def in_sampling_set(j: int, k) -> np.ndarray:
    """Маска k из A_j = [-2^{j-1}, 2^{j-1})"""
    half = (1 << j) >> 1
    k = _as_freq(k)
    return (k >= -half) & (k < (1 << j) - half)


def ramp_generator(rho: float, support: float) -> Callable[[np.ndarray], np.ndarray]:
    """Кусочно-линейный генератор eta: 1 на [-rho, rho], 0 вне (-support, support)"""
    def eta(xi):
        a = np.abs(np.asarray(xi, dtype=np.float64))
        return np.clip((support - a) / (support - rho), 0.0, 1.0)
    return eta


def bump_generator() -> Callable[[np.ndarray], np.ndarray]:
    """
    Гладкая срезающая функция phi_0: 1 при |xi| <= 1,
    exp(1 - 1/(1 - (|xi|-1)^2)) при 1 < |xi| < 2, 0 при |xi| >= 2
    """
    def phi0(xi):
        a = np.abs(np.asarray(xi, dtype=np.float64))
        out = np.where(a <= 1.0, 1.0, 0.0)
        mid = (a > 1.0) & (a < 2.0)
        t = a[mid] - 1.0
        out[mid] = np.exp(1.0 - 1.0 / (1.0 - t * t))
        return out
    return phi0


@dataclass(frozen=True)
class KernelFamily:
    """
    Семейство ядер восстановления phi_j, заданное символом phi^_j(k)
    и шириной полосы B_j: phi^_j(k) = 0 при |k| >= B_j
    """
    name: str
    symbol_fn: Callable[[int, np.ndarray], np.ndarray]
    bandwidth_fn: Callable[[int], int]
    normalized: bool = True
    params: Mapping[str, Any] = field(default_factory=dict)

    def symbol(self, j: int, k):
        """
        Значение символа phi^_j(k)

        Args:
            j: Уровень
            k: Частота или массив частот

        Returns:
            complex для скаляра, иначе комплексный массив той же формы
        """
        k = _as_freq(k)
        out = np.asarray(self.symbol_fn(int(j), np.atleast_1d(k).reshape(-1)), dtype=np.complex128)
        return _finish(out.reshape(k.shape), k.ndim == 0)

    def bandwidth(self, j: int) -> int:
        return int(self.bandwidth_fn(int(j)))


@dataclass(frozen=True)
class AveragerFamily:
    """
    Семейство усредняющих функций phi~_j. Для типа FUNCTION может быть
    задана плотность во временной области, для дельта-комбинаций - сдвиги
    (в долях шага сетки 2*pi/2^j) и веса.
    """
    name: str
    kind: AveragerKind
    symbol_fn: Callable[[int, np.ndarray], np.ndarray]
    params: Mapping[str, Any] = field(default_factory=dict)
    density: Optional[Callable[[int, np.ndarray], np.ndarray]] = None
    halfwidth: Optional[Callable[[int], float]] = None
    shifts: Tuple[float, ...] = ()
    weights: Tuple[complex, ...] = ()
    scale: complex = 1.0

    def symbol(self, j: int, k):
        k = _as_freq(k)
        out = self.scale * np.asarray(self.symbol_fn(int(j), np.atleast_1d(k).reshape(-1)), dtype=np.complex128)
        return _finish(out.reshape(k.shape), k.ndim == 0)

    def evaluate_density(self, j: int, x: np.ndarray) -> np.ndarray:
        if self.density is None:
            raise ParameterError(f"Усреднение {self.name} не имеет плотности во временной области")
        return self.scale * self.density(int(j), np.asarray(x, dtype=np.float64))

    def shift_offsets(self, j: int) -> np.ndarray:
        """Абсолютные сдвиги h_nu на уровне j"""
        return np.asarray(self.shifts, dtype=np.float64) * (2.0 * np.pi / (1 << j))

    def scaled(self, c: complex) -> "AveragerFamily":
        """Семейство с символом, умноженным на c"""
        return replace(self, name=f"{c}*{self.name}", scale=self.scale * c,
                       weights=tuple(w * c for w in self.weights))


def dlvp_kernel(rho: float, support: float) -> KernelFamily:
    """
    Ядро Валле Пуссена с кусочно-линейным генератором eta

    Args:
        rho: Полуширина плато, eta = 1 при |xi| <= rho
        support: Граница носителя, eta = 0 при |xi| >= support

    Returns:
        Семейство с символом eta(2^{-j} k) и B_j = ceil(support * 2^j)
    """
    if not 0 < rho < support:
        raise ParameterError(f"Требуется 0 < rho < support, получено rho={rho}, support={support}")
    eta = ramp_generator(rho, support)
    return KernelFamily(
        name=f"dlvp(rho={rho},support={support})",
        symbol_fn=lambda j, k: eta(k / float(1 << j)),
        bandwidth_fn=lambda j: math.ceil(support * (1 << j)),
        params={"kind": "dlvp", "rho": rho, "support": support},
    )


def _inverse_sinc(x: np.ndarray) -> np.ndarray:
    return 1.0 / np.sinc(x)


def modified_dlvp_kernel(rho: float, support: float, sigma: int,
                         correction: str = "plateau") -> KernelFamily:
    """
    Ядро Валле Пуссена, скорректированное обратным sinc-множителем

    Args:
        rho: Полуширина плато
        support: Граница носителя
        sigma: Параметр сжатия характеристического усреднения
        correction: "plateau" - коррекция только там, где eta = 1; "full" - на всем носителе

    Returns:
        Семейство с символом eta(2^{-j}k) * (pi 2^{-j-sigma} k)/sin(pi 2^{-j-sigma} k)
    """
    if correction not in ("plateau", "full"):
        raise ParameterError(f"Неизвестный тип коррекции: {correction}")
    if sigma < 1:
        raise ParameterError(f"Требуется sigma >= 1, получено {sigma}")
    reach = rho if correction == "plateau" else support
    # 1/sinc особенна при |xi| = 2^sigma
    if reach >= 2 ** sigma:
        raise ParameterError(f"Коррекция на |xi| <= {reach} пересекает нули sinc при sigma={sigma}")
    base = dlvp_kernel(rho, support)
    eta = ramp_generator(rho, support)

    def symbol(j, k):
        xi = k / float(1 << j)
        out = eta(xi).astype(np.complex128)
        zone = np.abs(xi) <= reach
        out[zone] *= _inverse_sinc(k[zone] / float(1 << (j + sigma)))
        return out

    return KernelFamily(
        name=f"dlvp*(rho={rho},support={support},sigma={sigma},{correction})",
        symbol_fn=symbol,
        bandwidth_fn=base.bandwidth_fn,
        params={"kind": "modified_dlvp", "rho": rho, "support": support,
                "sigma": sigma, "correction": correction},
    )


def _dirichlet_bandwidth(j: int) -> int:
    return ((1 << j) >> 1) + 1


def dirichlet_kernel() -> KernelFamily:
    """Ядро Дирихле: символ 1 на A_j"""
    return KernelFamily(
        name="dirichlet",
        symbol_fn=lambda j, k: in_sampling_set(j, k).astype(np.float64),
        bandwidth_fn=_dirichlet_bandwidth,
        params={"kind": "dirichlet"},
    )


def modified_dirichlet_kernel(sigma: int) -> KernelFamily:
    """
    Модифицированное ядро Дирихле: символ (pi 2^{-j-sigma} k)/sin(pi 2^{-j-sigma} k) на A_j

    Args:
        sigma: Параметр сжатия, sigma >= 1

    Returns:
        Семейство ядер
    """
    if sigma < 1:
        raise ParameterError(f"Требуется sigma >= 1, получено {sigma}")

    def symbol(j, k):
        inside = in_sampling_set(j, k)
        x = k / float(1 << (j + sigma))
        # на A_j |x| <= 2^{-sigma-1} < 1
        if np.any(np.abs(x[inside]) >= 1.0):
            raise ParameterError("Аргумент sin достиг кратного pi внутри A_j")
        out = np.zeros(k.shape, dtype=np.float64)
        out[inside] = _inverse_sinc(x[inside])
        return out

    return KernelFamily(
        name=f"dirichlet*(sigma={sigma})",
        symbol_fn=symbol,
        bandwidth_fn=_dirichlet_bandwidth,
        params={"kind": "modified_dirichlet", "sigma": sigma},
    )


def shifted_dirichlet_combo(sigma: int, a) -> KernelFamily:
    """
    Комбинация сдвинутых ядер Дирихле sum_nu a_nu D_j(x - pi nu / 2^{j+sigma})

    Args:
        sigma: Параметр сдвига
        a: Коэффициенты a_0..a_N

    Returns:
        Семейство с символом 1_{A_j}(k) sum_nu a_nu e^{-i nu pi k / 2^{j+sigma}}
    """
    a = np.asarray(a, dtype=np.complex128).reshape(-1)
    if len(a) == 0:
        raise ParameterError("Нужен хотя бы один коэффициент сдвига")
    nu = np.arange(len(a))
    normalized = abs(a.sum() - 1.0) < 1e-12
    if not normalized:
        logger.warning(f"Сумма коэффициентов сдвига {a.sum():.6g} != 1, phi^_j(0) != 1")

    def symbol(j, k):
        inside = in_sampling_set(j, k)
        phase = np.pi * k[:, None] * nu[None, :] / float(1 << (j + sigma))
        out = np.exp(-1j * phase) @ a
        return np.where(inside, out, 0.0)

    return KernelFamily(
        name=f"dirichlet_shift(sigma={sigma},a={np.round(a, 6).tolist()})",
        symbol_fn=symbol,
        bandwidth_fn=_dirichlet_bandwidth,
        normalized=normalized,
        params={"kind": "shifted_dirichlet", "sigma": sigma, "a": a.tolist()},
    )


def char_averager(sigma: int) -> AveragerFamily:
    """
    Нормированная характеристическая функция 2^{j+sigma} chi_{[-pi 2^{-j-sigma}, pi 2^{-j-sigma}]}

    Args:
        sigma: Параметр сжатия, sigma >= 1

    Returns:
        Усреднение с символом sinc(pi k 2^{-j-sigma})
    """
    if sigma < 1:
        raise ParameterError(f"Требуется sigma >= 1, получено {sigma}")

    def density(j, x):
        h = np.pi / float(1 << (j + sigma))
        wrapped = np.mod(x + np.pi, 2.0 * np.pi) - np.pi
        return np.where(np.abs(wrapped) <= h, float(1 << (j + sigma)), 0.0)

    return AveragerFamily(
        name=f"char(sigma={sigma})",
        kind=AveragerKind.FUNCTION,
        symbol_fn=lambda j, k: np.sinc(k / float(1 << (j + sigma))),
        params={"kind": "char", "sigma": sigma},
        density=density,
        halfwidth=lambda j: np.pi / float(1 << (j + sigma)),
    )


def delta_averager() -> AveragerFamily:
    """Периодическая дельта-функция: символ тождественно 1"""
    return AveragerFamily(
        name="delta",
        kind=AveragerKind.DELTA,
        symbol_fn=lambda j, k: np.ones(k.shape, dtype=np.float64),
        params={"kind": "delta"},
        shifts=(0.0,),
        weights=(1.0,),
    )


def shifted_delta_averager(shifts, weights) -> AveragerFamily:
    """
    Конечная комбинация сдвинутых дельта-функций sum_nu b_nu delta(x - h_nu)

    Args:
        shifts: Сдвиги t_nu в долях шага сетки, h_nu = t_nu * 2 pi / 2^j
        weights: Веса b_nu

    Returns:
        Усреднение с символом sum_nu b_nu e^{-i k h_nu}
    """
    shifts = tuple(float(t) for t in shifts)
    weights = tuple(complex(b) for b in weights)
    if len(shifts) != len(weights) or not shifts:
        raise ParameterError("Число сдвигов и весов должно совпадать и быть положительным")
    t = np.asarray(shifts)
    b = np.asarray(weights)

    def symbol(j, k):
        h = t * (2.0 * np.pi / (1 << j))
        return np.exp(-1j * k[:, None] * h[None, :]) @ b

    return AveragerFamily(
        name=f"delta_comb({list(shifts)})",
        kind=AveragerKind.DELTA_COMBINATION,
        symbol_fn=symbol,
        params={"kind": "delta_combination", "shifts": list(shifts),
                "weights": [[w.real, w.imag] for w in weights]},
        shifts=shifts,
        weights=weights,
    )


@dataclass(frozen=True)
class ShiftSolution:
    """Коэффициенты сдвига a_0..a_{s-1} и старший коэффициент дефекта alpha"""
    s: int
    sigma: int
    a: np.ndarray
    alpha: complex

    def kernel(self) -> KernelFamily:
        return shifted_dirichlet_combo(self.sigma, self.a)


def _taylor_matrix(rows: int, nu: np.ndarray) -> np.ndarray:
    """M[m, nu] - коэффициент при xi^m в sinc(xi) e^{-i nu xi}"""
    p = np.arange(rows)
    # ряд Тейлора sin(xi)/xi: (-1)^{p/2}/(p+1)! для четных p
    sinc_taylor = np.where(p % 2 == 0, (-1.0) ** (p // 2) / factorial(p + 1), 0.0)
    # exp(-i nu xi): (-i nu)^q / q!
    expo = np.ones((rows, len(nu)), dtype=np.complex128)
    for q in range(1, rows):
        expo[q] = expo[q - 1] * (-1j * nu) / q
    M = np.zeros((rows, len(nu)), dtype=np.complex128)
    for m in range(rows):
        M[m] = sinc_taylor[:m + 1][::-1] @ expo[:m + 1]
    return M


def solve_shift_coefficients(s: int, sigma: int) -> ShiftSolution:
    """
    Коэффициенты a_nu, обнуляющие порядки 0..s-1 дефекта 1 - sinc(xi) sum a_nu e^{-i nu xi}

    Args:
        s: Требуемый порядок, s >= 2
        sigma: Параметр сдвига для построения ядра

    Returns:
        ShiftSolution с N = s - 1 сдвигами
    """
    if s < 2:
        raise ParameterError(f"Требуется s >= 2, получено {s}")
    nu = np.arange(s, dtype=np.float64)
    M = _taylor_matrix(s + 1, nu)
    rhs = np.zeros(s, dtype=np.complex128)
    rhs[0] = 1.0
    system = M[:s]
    cond = np.linalg.cond(system)
    if not np.isfinite(cond) or cond > 1e12:
        raise ShiftSystemError(f"Система для s={s} вырождена (число обусловленности {cond:.3g})")
    try:
        a = np.linalg.solve(system, rhs)
    except np.linalg.LinAlgError as e:
        raise ShiftSystemError(f"Система для s={s} не решается: {e}") from e
    if np.max(np.abs(a.imag)) < 1e-12:
        a = a.real
    alpha = complex(-(M[s] @ a))
    logger.debug(f"Коэффициенты сдвига s={s}: {a}, alpha={alpha}")
    return ShiftSolution(s=s, sigma=sigma, a=a, alpha=alpha)


@dataclass(frozen=True)
class DefectEstimate:
    """
    Оценка порядка обращения в нуль g(xi) = 1 - phi^_j(k) phi~^_j(k).
    order=math.inf, если g ниже шума на всей выборке; None - оценка неоднозначна.
    """
    order: Optional[float]
    leading: complex
    slope: float
    residual: float
    level: int

    @property
    def is_indeterminate(self) -> bool:
        return self.order is None


def taylor_defect(kern: KernelFamily, avg: AveragerFamily, j: int = 10,
                  kmax: int = 32) -> DefectEstimate:
    """
    Порядок и старший коэффициент дефекта 1 - phi^ phi~^ при xi = 2^{-j} k -> 0

    Args:
        kern: Ядро
        avg: Усреднение
        j: Уровень, на котором берутся отсчеты
        kmax: Отсчеты при k = 1..kmax

    Returns:
        DefectEstimate по наклону log|g| от log xi
    """
    k = np.arange(1, kmax + 1, dtype=np.int64)
    xi = k / float(1 << j)
    g = 1.0 - kern.symbol(j, k) * avg.symbol(j, k)
    mag = np.abs(g)
    live = mag > DEFECT_FLOOR
    if not live.any():
        return DefectEstimate(order=math.inf, leading=0j, slope=math.inf, residual=0.0, level=j)
    if live.sum() < 4 or not live[0]:
        logger.warning(f"Дефект {kern.name} x {avg.name}: слишком мало значимых отсчетов")
        return DefectEstimate(order=None, leading=0j, slope=float("nan"), residual=float("nan"), level=j)

    x, y = np.log2(xi[live]), np.log2(mag[live])
    slope, intercept = np.polyfit(x, y, 1)
    residual = float(np.sqrt(np.mean((y - (slope * x + intercept)) ** 2)))
    order = float(round(slope))
    if abs(slope - order) > 0.15 or residual > 0.05:
        logger.warning(f"Дефект {kern.name} x {avg.name}: наклон {slope:.3f} не определяет порядок")
        return DefectEstimate(order=None, leading=0j, slope=float(slope), residual=residual, level=j)
    leading = complex(g[0] / xi[0] ** order)
    return DefectEstimate(order=order, leading=leading, slope=float(slope), residual=residual, level=j)


def kernel_from_spec(spec: Mapping[str, Any]) -> KernelFamily:
    """
    Ядро по тегу и параметрам из конфигурации

    Args:
        spec: Словарь с ключом kind и параметрами семейства

    Returns:
        KernelFamily
    """
    kind = spec.get("kind")
    if kind == "dlvp":
        return dlvp_kernel(float(spec.get("rho", 0.25)), float(spec.get("support", 0.5)))
    if kind == "modified_dlvp":
        return modified_dlvp_kernel(float(spec.get("rho", 0.25)), float(spec.get("support", 0.5)),
                                    int(spec.get("sigma", 2)), spec.get("correction", "plateau"))
    if kind == "dirichlet":
        return dirichlet_kernel()
    if kind == "modified_dirichlet":
        return modified_dirichlet_kernel(int(spec.get("sigma", 2)))
    if kind == "shifted_dirichlet":
        sigma = int(spec.get("sigma", 2))
        if "a" in spec:
            return shifted_dirichlet_combo(sigma, spec["a"])
        return solve_shift_coefficients(int(spec.get("s", 3)), sigma).kernel()
    raise ParameterError(f"Неизвестный тип ядра: {kind}")


def averager_from_spec(spec: Mapping[str, Any]) -> AveragerFamily:
    """Усреднение по тегу и параметрам из конфигурации"""
    kind = spec.get("kind")
    if kind == "char":
        avg = char_averager(int(spec.get("sigma", 2)))
    elif kind == "delta":
        avg = delta_averager()
    elif kind == "delta_combination":
        avg = shifted_delta_averager(spec.get("shifts", [0.0]), spec.get("weights", [1.0]))
    else:
        raise ParameterError(f"Неизвестный тип усреднения: {kind}")
    if "scale" in spec:
        avg = avg.scaled(float(spec["scale"]))
    return avg
