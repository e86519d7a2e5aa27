"""
Модуль для работы с конфигурацией: переменные окружения и файлы
экспериментов в формате TOML
"""

import logging
import math
import os
import tomllib
from dataclasses import asdict, dataclass, field
from typing import Any, Dict, List, Mapping, Optional

import numpy as np

from fourier_core import HypercrossError
from kernels import averager_from_spec, kernel_from_spec
from operators import OPERATOR_NAMES, QuadratureRule, QuasiInterpOp, named_operator
from spaces import NormFamily, NormSpec, PhiKind, ResolutionOfUnity, resolution_from_kind
from testbed import (
    BenchFunction,
    f_lower,
    korobov,
    phi_j,
    random_trig_poly,
    step_signal,
)

logger = logging.getLogger(__name__)

SCHEMA_VERSION = 1
FUNCTION_KINDS = ("korobov", "step", "phi_j", "f_lower", "trig_random")
PATHS = ("sampled", "aliasing")


class ConfigError(HypercrossError, ValueError):
    """Ошибка конфигурации; сообщение начинается с имени поля"""
    pass


def load_env_file(filename: str = "hypercross.env") -> None:
    """
    Загружает переменные окружения из файла KEY=VALUE

    Args:
        filename: Имя файла с переменными окружения
    """
    try:
        with open(filename, 'r', encoding='utf-8') as f:
            for line in f:
                line = line.strip()
                if line and not line.startswith('#'):
                    key, value = line.split('=', 1)
                    os.environ.setdefault(key.strip(), value.strip())
    except FileNotFoundError:
        logger.debug(f"Файл {filename} не найден, используются переменные окружения")
    except ValueError as e:
        logger.warning(f"Ошибка разбора {filename}: {e}")


class Config:
    """Настройки запуска: каталог результатов, число потоков, уровень логирования"""

    def __init__(self, env_file: str = "hypercross.env"):
        """
        Инициализация конфигурации

        Args:
            env_file: Путь к файлу с переменными окружения
        """
        load_env_file(env_file)
        self.out_dir = self._get_optional("HYPERCROSS_OUT", str)
        self.jobs = self._get_optional("HYPERCROSS_JOBS", int, 1)
        self.log_level = self._get_optional("HYPERCROSS_LOG_LEVEL", str, "INFO").upper()

    def _get_optional(self, key: str, type_func=str, default=None):
        """Получает необязательную переменную окружения"""
        value = os.getenv(key)
        if value is None or value == "":
            return default
        if type_func == int:
            try:
                return int(value)
            except ValueError:
                logger.warning(f"Неверный формат для {key}: {value}. Используется значение по умолчанию: {default}")
                return default
        return type_func(value)

    def resolve_out_dir(self, cli_value: Optional[str]) -> str:
        """Каталог результатов: HYPERCROSS_OUT имеет приоритет над --out"""
        return self.out_dir or cli_value or "results"


_config: Optional[Config] = None


def get_config() -> Config:
    """Возвращает глобальный экземпляр конфигурации"""
    global _config
    if _config is None:
        _config = Config()
    return _config


def _exponent(value: Any, name: str) -> float:
    """Показатель из [1, inf]; допускается строка "inf" """
    if isinstance(value, str) and value.strip().lower() in ("inf", "infinity"):
        return math.inf
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"{name}: ожидается число или \"inf\", получено {value!r}")
    value = float(value)
    if not 1.0 <= value <= math.inf:
        raise ConfigError(f"{name}: значение должно лежать в [1, inf], получено {value}")
    return value


def _get(table: Mapping[str, Any], key: str, kind, default: Any, section: str) -> Any:
    name = f"{section}.{key}" if section else key
    if key not in table:
        return default
    value = table[key]
    if kind is float and isinstance(value, int) and not isinstance(value, bool):
        value = float(value)
    if not isinstance(value, kind) or (kind is int and isinstance(value, bool)):
        raise ConfigError(f"{name}: ожидается {kind.__name__}, получено {value!r}")
    return value


def _section(data: Mapping[str, Any], name: str) -> Mapping[str, Any]:
    table = data.get(name, {})
    if not isinstance(table, dict):
        raise ConfigError(f"{name}: ожидается таблица")
    return table


@dataclass
class OperatorSettings:
    name: Optional[str] = "K*"
    kernel: Optional[Dict[str, Any]] = None
    averager: Optional[Dict[str, Any]] = None
    sigma: int = 2
    rho: float = 0.25
    support: float = 0.5
    correction: str = "plateau"
    quadrature_nodes: int = 16

    def build(self, d: int) -> QuasiInterpOp:
        rule = QuadratureRule(nodes=self.quadrature_nodes)
        if self.name is not None:
            return named_operator(self.name, d=d, sigma=self.sigma, rho=self.rho,
                                  support=self.support, correction=self.correction,
                                  quadrature=rule)
        kern = kernel_from_spec(self.kernel)
        avg = averager_from_spec(self.averager)
        label = f"{self.kernel.get('kind')}+{self.averager.get('kind')}"
        return QuasiInterpOp(kern, avg, d=d, name=label, quadrature=rule)


@dataclass
class FunctionSettings:
    kind: str = "korobov"
    a: float = 2.0
    bandwidth: Optional[int] = None
    level: List[int] = field(default_factory=list)
    n: int = 6
    xi: Optional[int] = None
    phi_kind: str = "smooth"
    terms: int = 24

    def build(self, d: int, seed: int, xi_default: Optional[int] = None) -> BenchFunction:
        if self.kind == "korobov":
            return korobov(self.a, d, self.bandwidth or 16384)
        if self.kind == "step":
            return step_signal(d, self.bandwidth or 4095)
        if self.kind == "phi_j":
            level = self.level or [1] * d
            return phi_j(level, resolution_from_kind(self.phi_kind))
        if self.kind == "f_lower":
            xi = self.xi if self.xi is not None else (xi_default if xi_default is not None else 1)
            return f_lower(self.n, xi, d)
        rng = np.random.default_rng(seed)
        poly = random_trig_poly(d, self.bandwidth or 8, rng, self.terms)
        return BenchFunction(model=poly, label=f"trig_random(seed={seed})")


@dataclass
class SweepSettings:
    n_min: int = 2
    n_max: int = 10
    q: List[float] = field(default_factory=lambda: [2.0])
    drop_smallest: int = 2
    path: str = "sampled"
    mode: str = "combination"
    predicted: str = "quasi"


@dataclass
class NormSettings:
    family: str = "B"
    p: float = 2.0
    theta: float = math.inf
    r: float = 1.5
    phi_kind: str = "smooth"
    jmax: int = 10

    def spec(self) -> NormSpec:
        return NormSpec(NormFamily(self.family), self.p, self.theta, self.r)

    def resolution(self) -> ResolutionOfUnity:
        return resolution_from_kind(self.phi_kind)


@dataclass
class ConditionSettings:
    s_values: List[float] = field(default_factory=lambda: [2.0])
    delta: float = 4.0
    jmin: int = 4
    jmax: int = 12
    umax: int = 14
    q_levels: int = 12
    shift_coefficients: List[List[float]] = field(default_factory=list)


@dataclass
class LpCheckSettings:
    corpus: List[str] = field(default_factory=lambda: ["phi_j", "korobov", "f_lower"])
    phi_max_level: int = 8
    korobov_a: float = 2.0
    korobov_bandwidth: int = 1024
    f_lower_n: int = 6
    max_spread: float = 50.0


@dataclass
class SharpnessSettings:
    n_min: int = 3
    n_max: int = 12
    scale: float = 1.0
    tol: float = 1e-10


@dataclass
class ExperimentConfig:
    """Полностью проверенная конфигурация эксперимента"""
    schema_version: int
    label: str
    d: int
    seed: int
    operator: OperatorSettings
    function: FunctionSettings
    sweep: SweepSettings
    norm: NormSettings
    conditions: ConditionSettings
    lp_check: LpCheckSettings
    sharpness: SharpnessSettings
    source: Optional[str] = None

    def metadata(self) -> Dict[str, Any]:
        """Соглашения, повторяемые в каждом выходном файле"""
        return {
            "schema_version": self.schema_version,
            "label": self.label,
            "seed": self.seed,
            "d": self.d,
            "measure": "normalized (2 pi)^{-d} dx",
            "phi_kind": self.norm.phi_kind,
            "operator": _jsonable(asdict(self.operator)),
            "source": self.source,
        }

    def to_dict(self) -> Dict[str, Any]:
        return _jsonable(asdict(self))


def _jsonable(value: Any) -> Any:
    if isinstance(value, float) and math.isinf(value):
        return "inf"
    if isinstance(value, dict):
        return {k: _jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    return value


def _parse_operator(table: Mapping[str, Any]) -> OperatorSettings:
    section = "operator"
    name = _get(table, "name", str, None, section)
    kernel = table.get("kernel")
    averager = table.get("averager")
    if name is None and (kernel is None or averager is None):
        name = "K*"
    if name is not None and name not in OPERATOR_NAMES:
        raise ConfigError(f"operator.name: неизвестный оператор {name!r}, допустимы {OPERATOR_NAMES}")
    if name is None:
        for key, value in (("kernel", kernel), ("averager", averager)):
            if not isinstance(value, dict) or "kind" not in value:
                raise ConfigError(f"operator.{key}: ожидается таблица с полем kind")
    settings = OperatorSettings(
        name=name,
        kernel=dict(kernel) if kernel else None,
        averager=dict(averager) if averager else None,
        sigma=_get(table, "sigma", int, 2, section),
        rho=_get(table, "rho", float, 0.25, section),
        support=_get(table, "support", float, 0.5, section),
        correction=_get(table, "correction", str, "plateau", section),
        quadrature_nodes=_get(table, "quadrature_nodes", int, 16, section),
    )
    if settings.sigma < 1:
        raise ConfigError(f"operator.sigma: требуется sigma >= 1, получено {settings.sigma}")
    if not 0 < settings.rho < settings.support:
        raise ConfigError("operator.rho: требуется 0 < rho < support")
    if settings.correction not in ("plateau", "full"):
        raise ConfigError("operator.correction: допустимы plateau и full")
    return settings


def _parse_function(table: Mapping[str, Any]) -> FunctionSettings:
    section = "function"
    kind = _get(table, "kind", str, "korobov", section)
    if kind not in FUNCTION_KINDS:
        raise ConfigError(f"function.kind: неизвестный тип {kind!r}, допустимы {FUNCTION_KINDS}")
    settings = FunctionSettings(
        kind=kind,
        a=_get(table, "a", float, 2.0, section),
        bandwidth=_get(table, "bandwidth", int, None, section),
        level=list(_get(table, "level", list, [], section)),
        n=_get(table, "n", int, 6, section),
        xi=_get(table, "xi", int, None, section),
        phi_kind=_get(table, "phi_kind", str, "smooth", section),
        terms=_get(table, "terms", int, 24, section),
    )
    if kind == "korobov" and settings.a <= 0.5:
        raise ConfigError(f"function.a: требуется a > 1/2, получено {settings.a}")
    if settings.bandwidth is not None and settings.bandwidth < 1:
        raise ConfigError("function.bandwidth: требуется положительное значение")
    if settings.phi_kind not in {k.value for k in PhiKind}:
        raise ConfigError(f"function.phi_kind: неизвестный тип {settings.phi_kind!r}")
    return settings


def _parse_sweep(table: Mapping[str, Any]) -> SweepSettings:
    section = "sweep"
    raw_q = table.get("q", [2.0])
    if not isinstance(raw_q, list):
        raw_q = [raw_q]
    settings = SweepSettings(
        n_min=_get(table, "n_min", int, 2, section),
        n_max=_get(table, "n_max", int, 10, section),
        q=[_exponent(v, "sweep.q") for v in raw_q],
        drop_smallest=_get(table, "drop_smallest", int, 2, section),
        path=_get(table, "path", str, "sampled", section),
        mode=_get(table, "mode", str, "combination", section),
        predicted=_get(table, "predicted", str, "quasi", section),
    )
    if settings.n_min < 0 or settings.n_max < settings.n_min:
        raise ConfigError("sweep.n_max: требуется 0 <= n_min <= n_max")
    if settings.path not in PATHS:
        raise ConfigError(f"sweep.path: допустимы {PATHS}")
    if settings.mode not in ("combination", "direct"):
        raise ConfigError("sweep.mode: допустимы combination и direct")
    if settings.predicted not in ("quasi", "sampling", "convolution"):
        raise ConfigError("sweep.predicted: допустимы quasi, sampling и convolution")
    if settings.drop_smallest < 0:
        raise ConfigError("sweep.drop_smallest: требуется неотрицательное значение")
    return settings


def _parse_norm(table: Mapping[str, Any]) -> NormSettings:
    section = "norm"
    family = _get(table, "family", str, "B", section)
    if family not in ("B", "F"):
        raise ConfigError(f"norm.family: допустимы B и F, получено {family!r}")
    settings = NormSettings(
        family=family,
        p=_exponent(table.get("p", 2.0), "norm.p"),
        theta=_exponent(table.get("theta", "inf"), "norm.theta"),
        r=_get(table, "r", float, 1.5, section),
        phi_kind=_get(table, "phi_kind", str, "smooth", section),
        jmax=_get(table, "jmax", int, 10, section),
    )
    if family == "F" and math.isinf(settings.p):
        raise ConfigError("norm.p: пространства F требуют p < inf")
    if settings.phi_kind not in {k.value for k in PhiKind}:
        raise ConfigError(f"norm.phi_kind: неизвестный тип {settings.phi_kind!r}")
    if settings.jmax < 0:
        raise ConfigError("norm.jmax: требуется неотрицательное значение")
    return settings


def _parse_conditions(table: Mapping[str, Any]) -> ConditionSettings:
    section = "conditions"
    s_values = [float(v) for v in _get(table, "s", list, [2.0], section)]
    if any(s <= 0 for s in s_values):
        raise ConfigError("conditions.s: все значения должны быть положительными")
    shifts = _get(table, "shift_coefficients", list, [], section)
    if any(not isinstance(row, list) or not row for row in shifts):
        raise ConfigError("conditions.shift_coefficients: ожидается список непустых списков")
    settings = ConditionSettings(
        s_values=s_values,
        delta=_get(table, "delta", float, 4.0, section),
        jmin=_get(table, "jmin", int, 4, section),
        jmax=_get(table, "jmax", int, 12, section),
        umax=_get(table, "umax", int, 14, section),
        q_levels=_get(table, "q_levels", int, 12, section),
        shift_coefficients=[[float(v) for v in row] for row in shifts],
    )
    if settings.delta <= 0:
        raise ConfigError("conditions.delta: требуется delta > 0")
    if settings.jmax - settings.jmin < 2 or settings.jmin < 1:
        raise ConfigError("conditions.jmax: нужно не менее трех уровней, jmin >= 1")
    return settings


def _parse_lp_check(table: Mapping[str, Any]) -> LpCheckSettings:
    section = "lp_check"
    corpus = list(_get(table, "corpus", list, ["phi_j", "korobov", "f_lower"], section))
    unknown = set(corpus) - {"phi_j", "korobov", "f_lower", "constant"}
    if unknown:
        raise ConfigError(f"lp_check.corpus: неизвестные элементы {sorted(unknown)}")
    return LpCheckSettings(
        corpus=corpus,
        phi_max_level=_get(table, "phi_max_level", int, 8, section),
        korobov_a=_get(table, "korobov_a", float, 2.0, section),
        korobov_bandwidth=_get(table, "korobov_bandwidth", int, 1024, section),
        f_lower_n=_get(table, "f_lower_n", int, 6, section),
        max_spread=_get(table, "max_spread", float, 50.0, section),
    )


def _parse_sharpness(table: Mapping[str, Any]) -> SharpnessSettings:
    section = "sharpness"
    settings = SharpnessSettings(
        n_min=_get(table, "n_min", int, 3, section),
        n_max=_get(table, "n_max", int, 12, section),
        scale=_get(table, "scale", float, 1.0, section),
        tol=_get(table, "tol", float, 1e-10, section),
    )
    if settings.n_min < 1 or settings.n_max < settings.n_min:
        raise ConfigError("sharpness.n_max: требуется 1 <= n_min <= n_max")
    return settings


def parse_experiment(data: Mapping[str, Any], source: Optional[str] = None) -> ExperimentConfig:
    """
    Проверяет словарь конфигурации и строит ExperimentConfig

    Args:
        data: Содержимое TOML-файла
        source: Путь к файлу (для метаданных)

    Returns:
        ExperimentConfig
    """
    version = data.get("schema_version")
    if version != SCHEMA_VERSION:
        raise ConfigError(f"schema_version: ожидается {SCHEMA_VERSION}, получено {version!r}")
    d = _get(data, "d", int, 1, "")
    if not 1 <= d <= 6:
        raise ConfigError(f"d: размерность должна лежать в [1, 6], получено {d}")
    experiment = ExperimentConfig(
        schema_version=version,
        label=_get(data, "label", str, "experiment", ""),
        d=d,
        seed=_get(data, "seed", int, 0, ""),
        operator=_parse_operator(_section(data, "operator")),
        function=_parse_function(_section(data, "function")),
        sweep=_parse_sweep(_section(data, "sweep")),
        norm=_parse_norm(_section(data, "norm")),
        conditions=_parse_conditions(_section(data, "conditions")),
        lp_check=_parse_lp_check(_section(data, "lp_check")),
        sharpness=_parse_sharpness(_section(data, "sharpness")),
        source=source,
    )
    # параметры операторов проверяются построением семейств
    try:
        experiment.operator.build(d)
    except ValueError as e:
        raise ConfigError(f"operator: {e}") from e
    return experiment


def load_experiment(path: str) -> ExperimentConfig:
    """
    Загружает и проверяет файл эксперимента

    Args:
        path: Путь к TOML-файлу

    Returns:
        ExperimentConfig
    """
    try:
        with open(path, 'rb') as f:
            data = tomllib.load(f)
    except FileNotFoundError as e:
        raise ConfigError(f"config: файл {path} не найден") from e
    except tomllib.TOMLDecodeError as e:
        raise ConfigError(f"config: ошибка разбора TOML в {path}: {e}") from e
    experiment = parse_experiment(data, source=path)
    logger.debug(f"Конфигурация {path} загружена: {experiment.label}")
    return experiment
