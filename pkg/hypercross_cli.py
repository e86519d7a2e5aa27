#!/usr/bin/env python3
"""
CLI для экспериментов с квазиинтерполяционными операторами и алгоритмом Смоляка
Поддерживает команды rates, conditions, lp-check, sharpness и grid-info
"""

import argparse
import csv
import json
import logging
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from datetime import datetime
from typing import Any, Dict, Iterable, List, Optional

import numpy as np

from config import ConfigError, ExperimentConfig, get_config, load_experiment
from fourier_core import HypercrossError, ParameterError, TrigPoly, hyperbolic_cross
from kernels import (
    AveragerKind,
    char_averager,
    shifted_dirichlet_combo,
    solve_shift_coefficients,
    taylor_defect,
)
from smolyak import combination_plan, level_vectors, smolyak_grid_size
from spaces import (
    NormFamily,
    averager_norm_Lqj,
    besov_norm,
    check_cond,
    compat_condition_proxy,
    discrete_lp_quasi_norm,
    tl_norm,
)
from testbed import (
    CSV_COLUMNS,
    RateFitError,
    BenchFunction,
    fit_rate,
    f_lower,
    korobov,
    measure_error,
    phi_j,
    predicted_rate,
    sharpness_table,
)

logger = logging.getLogger(__name__)

COMMANDS = ("rates", "conditions", "lp-check", "sharpness", "grid-info")
CHECK_LEVELS = range(0, 11)


class RunLog:
    """Журнал запуска команды с отметками времени"""

    def __init__(self, command: str, quiet: bool = False):
        self.command = command
        self.quiet = quiet
        self.log_entries: List[str] = []
        self.log(f"Запуск команды {command} - {datetime.now()}")

    def log(self, message: str):
        """Логирование сообщений"""
        timestamp = datetime.now().strftime('%Y-%m-%d %H:%M:%S')
        log_entry = f"[{timestamp}] {message}"
        if not self.quiet:
            print(log_entry)
        self.log_entries.append(log_entry)

    def save(self, out_dir: str):
        """Сохранение журнала в <out>/<command>.log"""
        path = os.path.join(out_dir, f"{self.command}.log")
        try:
            with open(path, 'w', encoding='utf-8') as f:
                f.write('\n'.join(self.log_entries))
        except OSError as e:
            print(f"Ошибка сохранения лога: {e}", file=sys.stderr)


@dataclass
class RunContext:
    out_dir: str
    jobs: int
    run_log: RunLog

    def path(self, name: str) -> str:
        return os.path.join(self.out_dir, name)


def _jsonable(value: Any) -> Any:
    if isinstance(value, (complex, np.complexfloating)):
        return {"re": float(value.real), "im": float(value.imag)}
    if isinstance(value, (float, np.floating)):
        value = float(value)
        if math.isinf(value):
            return "inf" if value > 0 else "-inf"
        if math.isnan(value):
            return None
        return value
    if isinstance(value, (np.integer,)):
        return int(value)
    if isinstance(value, np.ndarray):
        return [_jsonable(v) for v in value.tolist()]
    if isinstance(value, dict):
        return {str(k): _jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    return value


def _write_csv(path: str, fieldnames: List[str], rows: Iterable[Dict[str, Any]]):
    with open(path, 'w', newline='', encoding='utf-8') as csvfile:
        writer = csv.DictWriter(csvfile, fieldnames=fieldnames)
        writer.writeheader()
        for row in rows:
            writer.writerow(row)


def _write_json(path: str, experiment: ExperimentConfig, payload: Dict[str, Any]):
    data = {"metadata": experiment.metadata(), **payload}
    with open(path, 'w', encoding='utf-8') as f:
        json.dump(_jsonable(data), f, ensure_ascii=False, indent=2)


def _test_function(experiment: ExperimentConfig, op) -> BenchFunction:
    xi_default = None
    if experiment.function.kind == "f_lower" and experiment.function.xi is None:
        pattern = check_cond(op.avg)
        if pattern is None:
            raise ParameterError(f"Усреднение {op.avg.name} не удовлетворяет условию (cond)")
        xi_default = pattern.xi
    return experiment.function.build(experiment.d, experiment.seed, xi_default)


def cmd_rates(experiment: ExperimentConfig, ctx: RunContext) -> int:
    """
    Сходимость T_n f: записи ошибок, подгонка скорости и сравнение с предсказанием

    Args:
        experiment: Конфигурация эксперимента
        ctx: Каталог результатов, потоки и журнал

    Returns:
        0, если все записи надежны и все подгонки удались
    """
    log = ctx.run_log.log
    op = experiment.operator.build(experiment.d)
    f = _test_function(experiment, op)
    sweep = experiment.sweep
    units = [(q, n) for q in sweep.q for n in range(sweep.n_min, sweep.n_max + 1)]
    log(f"Оператор {op.name}, d={op.d}, функция {f.label}, {len(units)} точек")

    def run(unit):
        q, n = unit
        return measure_error(op, f, n, q, path=sweep.path, mode=sweep.mode)

    if ctx.jobs > 1:
        with ThreadPoolExecutor(max_workers=ctx.jobs) as pool:
            records = list(pool.map(run, units))
    else:
        records = [run(unit) for unit in units]

    _write_csv(ctx.path("rates.csv"), CSV_COLUMNS + ["reliable"],
               ({**rec.to_row(), "reliable": rec.reliable} for rec in records))
    _write_csv(ctx.path("rates_plot.csv"), ["q", "n", "log2_error"],
               ({"q": "inf" if math.isinf(rec.q) else rec.q, "n": rec.n,
                 "log2_error": math.log2(rec.error) if rec.error > 0 else "-inf"}
                for rec in records))

    ok = all(rec.reliable for rec in records)
    norm = experiment.norm
    fits = []
    for q in sweep.q:
        subset = [rec for rec in records if rec.q == q]
        entry: Dict[str, Any] = {"q": q}
        try:
            prediction = predicted_rate(sweep.predicted, norm.p, q, norm.theta, norm.r,
                                        experiment.d, norm.family)
            entry["predicted"] = {"rate": prediction.rate, "log_power": prediction.log_power,
                                  "source": prediction.source}
        except ParameterError as e:
            log(f"Предсказание для q={q} недоступно: {e}")
            entry["predicted"] = None
        try:
            fit = fit_rate(subset, drop_smallest=sweep.drop_smallest)
            entry["fit"] = fit.to_dict()
        except RateFitError as e:
            log(f"❌ Подгонка для q={q} не удалась: {e}")
            entry["fit"] = None
            ok = False
        fits.append(entry)

    _write_json(ctx.path("rates.json"), experiment, {"function": f.label, "tail": f.tail,
                                                     "fits": fits})

    log(f"{'q':>6} {'r predicted':>12} {'r fitted':>10} {'beta':>8}")
    for entry in fits:
        predicted = entry["predicted"]["rate"] if entry["predicted"] else float("nan")
        fitted = entry["fit"]["rate"] if entry["fit"] else float("nan")
        beta = entry["fit"]["beta"] if entry["fit"] else float("nan")
        log(f"{entry['q']:>6} {predicted:>12.4f} {fitted:>10.4f} {beta:>8.3f}")
    if not all(rec.reliable for rec in records):
        log("⚠️  Есть записи с хвостом усечения, сравнимым с ошибкой")
    return 0 if ok else 1


def _verdict(passed: bool) -> str:
    return "PASS" if passed else "FAIL"


def cmd_conditions(experiment: ExperimentConfig, ctx: RunContext) -> int:
    """
    Таблица проверок: носитель ядра, нормировка, нормы L_{p',j},
    заменитель условия совместимости, условие (cond), порядок дефекта

    Args:
        experiment: Конфигурация эксперимента
        ctx: Каталог результатов, потоки и журнал

    Returns:
        0, если нет строк FAIL
    """
    log = ctx.run_log.log
    op = experiment.operator.build(1)
    cond = experiment.conditions
    rows: List[Dict[str, Any]] = []

    def add(check: str, param: str, value: Any, verdict: str):
        rows.append({"check": check, "param": param, "value": value, "verdict": verdict})

    bandwidth_ok = True
    for j in CHECK_LEVELS:
        band = op.kern.bandwidth(j)
        outside = np.arange(band, 2 * band + 1, dtype=np.int64)
        values = np.abs(op.kern.symbol(j, np.concatenate([outside, -outside])))
        if band > 1 << (j + 1) or np.any(values > 0):
            bandwidth_ok = False
    add("bandwidth", "j<=10", op.kern.bandwidth(max(CHECK_LEVELS)), _verdict(bandwidth_ok))

    deviation = max(max(abs(op.kern.symbol(j, 0) - 1.0), abs(op.avg.symbol(j, 0) - 1.0))
                    for j in CHECK_LEVELS)
    add("normalization", "j<=10", deviation, _verdict(deviation <= 1e-12))

    p = experiment.norm.p
    p_dual = math.inf if p == 1.0 else (1.0 if math.isinf(p) else p / (p - 1.0))
    if op.avg.kind is AveragerKind.FUNCTION:
        norms = [averager_norm_Lqj(op.avg, p_dual, j) for j in range(cond.q_levels + 1)]
        spread = max(norms) / min(norms)
        add("L_q,j", f"q={p_dual}", max(norms), _verdict(spread <= 4.0))
    else:
        add("L_q,j", f"q={p_dual}", None, "N/A")

    for s in cond.s_values:
        report = compat_condition_proxy(op, s, cond.delta, cond.jmax, cond.jmin)
        add("compat", f"s={s}", report.slope, f"{report.verdict} (HEURISTIC)")

    pattern = check_cond(op.avg, umax=cond.umax)
    if pattern is None:
        add("cond", f"umax={cond.umax}", None, "NONE")
    else:
        add("cond", f"umax={cond.umax}", {"xi": pattern.xi, "lambda": pattern.lam}, "PASS")

    defect = taylor_defect(op.kern, op.avg)
    add("taylor_defect", op.name, defect.order, "INDETERMINATE" if defect.is_indeterminate else "INFO")

    sigma = experiment.operator.sigma
    for s in sorted({int(s) for s in cond.s_values if s >= 2 and float(s).is_integer()}):
        solution = solve_shift_coefficients(s, sigma)
        measured = taylor_defect(solution.kernel(), char_averager(sigma))
        passed = measured.order is not None and measured.order >= s
        add("shift_solver", f"s={s}", {"a": solution.a, "order": measured.order}, _verdict(passed))
    for a in cond.shift_coefficients:
        measured = taylor_defect(shifted_dirichlet_combo(sigma, a), char_averager(sigma))
        add("shift_order", f"a={a}", measured.order, "INFO")

    _write_csv(ctx.path("conditions.csv"), ["check", "param", "value", "verdict"],
               ({**row, "value": json.dumps(_jsonable(row["value"]))} for row in rows))
    _write_json(ctx.path("conditions.json"), experiment, {"checks": rows})

    for row in rows:
        log(f"{row['check']:<14} {row['param']:<24} {row['verdict']}")
    return 1 if any(row["verdict"].startswith("FAIL") for row in rows) else 0


def _lp_corpus(experiment: ExperimentConfig, op) -> List[BenchFunction]:
    settings = experiment.lp_check
    d = experiment.d
    corpus = []
    for item in settings.corpus:
        if item == "phi_j":
            phi = experiment.norm.resolution()
            for m in range(settings.phi_max_level + 1):
                corpus.extend(phi_j(j, phi) for j in level_vectors(m, d))
        elif item == "korobov":
            corpus.append(korobov(settings.korobov_a, d, settings.korobov_bandwidth))
        elif item == "f_lower":
            pattern = check_cond(op.avg)
            if pattern is None:
                logger.warning(f"f_lower пропущена: {op.avg.name} не удовлетворяет условию (cond)")
                continue
            corpus.append(f_lower(max(settings.f_lower_n, d), pattern.xi, d))
        else:
            corpus.append(BenchFunction(model=TrigPoly.constant(d), label="constant"))
    return corpus


def cmd_lp_check(experiment: ExperimentConfig, ctx: RunContext) -> int:
    """
    Отношения дискретной квазинормы к норме B/F на корпусе функций

    Args:
        experiment: Конфигурация эксперимента
        ctx: Каталог результатов, потоки и журнал

    Returns:
        0, если max/min отношений не превышает max_spread
    """
    log = ctx.run_log.log
    op = experiment.operator.build(experiment.d)
    spec = experiment.norm.spec()
    phi = experiment.norm.resolution()
    corpus = _lp_corpus(experiment, op)
    log(f"Корпус: {len(corpus)} функций, оператор {op.name}, {spec.family.value}")

    def run(f: BenchFunction) -> Dict[str, Any]:
        discrete = discrete_lp_quasi_norm(op, f.model, spec, experiment.norm.jmax)
        if spec.family is NormFamily.B:
            continuous = besov_norm(f.model, spec, phi)
        else:
            continuous = tl_norm(f.model, spec, phi)
        ratio = discrete.value / continuous if continuous > 0 else math.inf
        return {"label": f.label, "discrete": discrete.value, "continuous": continuous,
                "ratio": ratio, "truncation": discrete.truncation}

    if ctx.jobs > 1:
        with ThreadPoolExecutor(max_workers=ctx.jobs) as pool:
            rows = list(pool.map(run, corpus))
    else:
        rows = [run(f) for f in corpus]

    ratios = np.array([row["ratio"] for row in rows if math.isfinite(row["ratio"])])
    if ratios.size == 0:
        log("❌ Нет конечных отношений")
        return 1
    low, high = float(ratios.min()), float(ratios.max())
    spread = high / low if low > 0 else math.inf
    passed = spread <= experiment.lp_check.max_spread

    _write_csv(ctx.path("lp_check.csv"), ["label", "discrete", "continuous", "ratio", "truncation"],
               rows)
    _write_csv(ctx.path("lp_check_plot.csv"), ["continuous", "discrete"],
               ({"continuous": row["continuous"], "discrete": row["discrete"]} for row in rows))
    _write_json(ctx.path("lp_check.json"), experiment,
                {"min_ratio": low, "max_ratio": high, "spread": spread,
                 "verdict": _verdict(passed), "norm": spec.family.value})

    log(f"Отношения в [{low:.4g}, {high:.4g}], max/min = {spread:.3g} -> {_verdict(passed)}")
    return 0 if passed else 1


def cmd_sharpness(experiment: ExperimentConfig, ctx: RunContext) -> int:
    """
    c_0(T_n f_n) против lambda^d C(n-1, d-1)

    Args:
        experiment: Конфигурация эксперимента
        ctx: Каталог результатов, потоки и журнал

    Returns:
        0, если все значения совпали с допуском
    """
    log = ctx.run_log.log
    settings = experiment.sharpness
    op = experiment.operator.build(experiment.d)
    ns = [n for n in range(settings.n_min, settings.n_max + 1) if n >= experiment.d]
    table = sharpness_table(op, ns, settings.scale)
    rows = []
    for n, c0, expected in table:
        error = abs(c0 - expected)
        rows.append({"n": n, "c0_re": c0.real, "c0_im": c0.imag, "expected": expected,
                     "abs_error": error, "match": error <= settings.tol})

    _write_csv(ctx.path("sharpness.csv"), ["n", "c0_re", "c0_im", "expected", "abs_error", "match"],
               rows)
    _write_json(ctx.path("sharpness.json"), experiment, {"rows": rows})

    log(f"{'n':>4} {'c0':>14} {'expected':>14} {'match':>6}")
    for row in rows:
        log(f"{row['n']:>4} {row['c0_re']:>14.10f} {row['expected']:>14.10f} {str(row['match']):>6}")
    return 0 if all(row["match"] for row in rows) else 1


def cmd_grid_info(experiment: ExperimentConfig, ctx: RunContext) -> int:
    """Размеры разреженных сеток, мощности крестов и план комбинационной техники"""
    log = ctx.run_log.log
    d = experiment.d
    sweep = experiment.sweep
    rows = []
    for n in range(sweep.n_min, sweep.n_max + 1):
        plan = combination_plan(n, d)
        rows.append({"n": n, "grid_size": smolyak_grid_size(n, d),
                     "cross_size": len(hyperbolic_cross(n, d)),
                     "plan_terms": len(plan.terms), "coefficient_sum": plan.coefficient_sum()})
    plan = combination_plan(sweep.n_max, d)

    _write_csv(ctx.path("grid_info.csv"),
               ["n", "grid_size", "cross_size", "plan_terms", "coefficient_sum"], rows)
    _write_json(ctx.path("grid_info.json"), experiment,
                {"rows": rows, "plan": json.loads(plan.to_json())})

    for row in rows:
        log(f"n={row['n']:>3}: узлов {row['grid_size']}, крест {row['cross_size']}, "
            f"термов {row['plan_terms']}")
    return 0 if all(row["coefficient_sum"] == 1 for row in rows) else 1


HANDLERS = {
    "rates": cmd_rates,
    "conditions": cmd_conditions,
    "lp-check": cmd_lp_check,
    "sharpness": cmd_sharpness,
    "grid-info": cmd_grid_info,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog='hypercross',
        description='Эксперименты с квазиинтерполяцией и алгоритмом Смоляка на торе',
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog="""
Операторы I, V, K, K* по умолчанию используют ядро dlvp с плато rho=1/4 и
носителем 1/2 в долях 2^j (а не rho=1/2, носитель 1). Другие значения
задаются полями operator.rho и operator.support.

Примеры использования:

1. Скорость сходимости K* на функции Коробова:
   hypercross rates --config configs/kstar_korobov.toml --jobs 4

2. Проверка условий для пары (ядро Дирихле, характеристическое усреднение):
   hypercross conditions --config configs/conditions_dirichlet.toml

3. Отношения норм Литтлвуда-Пэли:
   hypercross lp-check --config configs/lp_check.toml --out results/lp

4. Свидетель точности оценки снизу:
   hypercross sharpness --config configs/sharpness.toml

5. Проверить конфигурацию без вычислений:
   hypercross grid-info --config configs/grid_info.toml --dry-run
        """
    )
    parser.add_argument('command', choices=COMMANDS, help='Команда')
    parser.add_argument('--config', required=True, help='Файл эксперимента в формате TOML')

    exec_group = parser.add_argument_group('Настройки выполнения')
    exec_group.add_argument('--jobs', type=int,
                            help='Число потоков (по умолчанию из HYPERCROSS_JOBS или 1)')
    exec_group.add_argument('--out',
                            help='Каталог результатов (HYPERCROSS_OUT имеет приоритет)')
    exec_group.add_argument('--dry-run', action='store_true',
                            help='Только проверить и напечатать конфигурацию')

    misc_group = parser.add_argument_group('Дополнительные опции')
    misc_group.add_argument('--verbose', '-v', action='store_true',
                            help='Подробный вывод')
    misc_group.add_argument('--quiet', '-q', action='store_true',
                            help='Минимальный вывод')
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    """Основная функция с CLI интерфейсом"""
    parser = build_parser()
    args = parser.parse_args(argv)

    if args.verbose and args.quiet:
        parser.error("--verbose и --quiet нельзя использовать одновременно")
    if args.jobs is not None and args.jobs < 1:
        parser.error("--jobs должно быть положительным")

    config = get_config()
    if args.verbose:
        level = logging.DEBUG
    elif args.quiet:
        level = logging.WARNING
    else:
        level = getattr(logging, config.log_level, logging.INFO)
    logging.basicConfig(level=level, format='%(asctime)s - %(levelname)s - %(message)s')

    try:
        experiment = load_experiment(args.config)
    except ConfigError as e:
        print(f"Ошибка конфигурации: {e}", file=sys.stderr)
        return 2

    if args.dry_run:
        print(json.dumps(experiment.to_dict(), ensure_ascii=False, indent=2))
        return 0

    out_dir = config.resolve_out_dir(args.out)
    jobs = args.jobs or config.jobs or 1
    run_log = RunLog(args.command, quiet=args.quiet)
    ctx = RunContext(out_dir=out_dir, jobs=max(1, jobs), run_log=run_log)

    try:
        os.makedirs(out_dir, exist_ok=True)
        run_log.log(f"Конфигурация: {args.config} ({experiment.label}), результаты: {out_dir}")
        code = HANDLERS[args.command](experiment, ctx)
        run_log.log("✅ Все проверки пройдены" if code == 0 else "❌ Есть непройденные проверки")
        if args.quiet:
            print(code)
        return code
    except ConfigError as e:
        print(f"Ошибка конфигурации: {e}", file=sys.stderr)
        return 2
    except HypercrossError as e:
        run_log.log(f"Ошибка выполнения: {e}")
        print(f"Ошибка выполнения: {e}", file=sys.stderr)
        return 1
    except KeyboardInterrupt:
        if not args.quiet:
            print("\n⚠️  Выполнение прервано пользователем")
        return 130
    finally:
        if os.path.isdir(out_dir):
            run_log.save(out_dir)


if __name__ == "__main__":
    sys.exit(main())
