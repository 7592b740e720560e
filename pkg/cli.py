#!/usr/bin/env python3
"""
Командная строка: проверка конфигурации, расчёт одной точки, свипы и рисунки
"""

import argparse
import json
import logging
import sys
from typing import Optional, Sequence

import numpy as np

from config import Config
from errors import InstabilityError, SimulatorError, ValidationError
from lindyn import ORDERING, build_linear_model, stability, steady_covariance
from measures import measure_all, negativity_in_base
from physpar import FILE_KEYS, SCHEMA, SystemConfig, baseline_config, config_hash, load_config
from storage import ResultStore
from sweep import FIGURES, Axis, SweepSpec, figure_preset, run_sweep
from units import UnitHandler

logger = logging.getLogger(__name__)


class _Parser(argparse.ArgumentParser):
    """Ошибки разбора аргументов -> ValidationError (код выхода 1)"""

    def error(self, message):
        raise ValidationError([f"arguments: {message}"])


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument('-o', '--output', default=None, help='output directory (default: OUTPUT_DIR)')
    common.add_argument('--full-linearization', action='store_true',
                        help='keep the -G q term in the magnon X equation')
    common.add_argument('--log-base', choices=('e', '2'), default=None,
                        help='logarithm base for printed E_dd (default: LOG_BASE)')
    common.add_argument('--workers', type=int, default=None, help='worker processes for sweeps')
    common.add_argument('--log-level', default=None, help='override LOG_LEVEL')

    parser = _Parser(prog='magnomech', description='Two-site cavity magnomechanics Gaussian simulator')
    parser.add_argument('--version', action='version', version=f"%(prog)s {Config.VERSION}")
    commands = parser.add_subparsers(dest='command', required=True, parser_class=_Parser)

    check = commands.add_parser('check', parents=[common], help='validate a config and print resolved values')
    check.add_argument('config')

    stab = commands.add_parser('stability', parents=[common], help='drift-matrix eigenvalues')
    stab.add_argument('config')

    steady = commands.add_parser('steady', parents=[common], help='steady-state measures')
    steady.add_argument('config')
    steady.add_argument('--dump', action='store_true', help='write K, L, C as a binary dump')
    steady.add_argument('--method', choices=('kron', 'bartels-stewart'), default='kron')

    evolve = commands.add_parser('evolve', parents=[common], help='time evolution from vacuum')
    evolve.add_argument('config')
    evolve.add_argument('--t-end', type=float, default=1.0, help='final time in microseconds')
    evolve.add_argument('--samples', type=int, default=2001, help='time samples including t = 0')

    sweep = commands.add_parser('sweep', parents=[common], help='grid sweep over 1-2 axes')
    sweep.add_argument('config')
    sweep.add_argument('--axis', action='append', required=True,
                       help='name:unit:start:stop:num[:log], repeat for a second axis')
    sweep.add_argument('--mode', choices=('steady', 'evolve'), default='steady')
    sweep.add_argument('--t-end', type=float, default=1.0, help='evolve mode: final time in microseconds')
    sweep.add_argument('--samples', type=int, default=201, help='evolve mode: time samples')
    sweep.add_argument('--name', default='sweep', help='output file stem')

    figure = commands.add_parser('figure', parents=[common], help='figure preset tables')
    figure.add_argument('name', help=f"one of: {', '.join(FIGURES)}")
    figure.add_argument('config', nargs='?', default=None, help='base config (default: built-in baseline)')
    figure.add_argument('--points', type=int, default=None, help='grid resolution override')

    return parser


# ===== РАЗБОР =====

def parse_axis(text: str) -> Axis:
    """'delta_d:omega_b:0:2:101' или 'T:K:1e-4:1:201:log'"""
    parts = text.split(':')
    if len(parts) not in (5, 6) or (len(parts) == 6 and parts[5] != 'log'):
        raise ValidationError([f"--axis: expected name:unit:start:stop:num[:log], got '{text}'"])
    name, unit, start, stop, num = parts[:5]
    try:
        start_value, stop_value, count = float(start), float(stop), int(num)
    except ValueError:
        raise ValidationError([f"--axis: bad number in '{text}'"])
    if count < 1:
        raise ValidationError([f"--axis: point count must be >= 1 in '{text}'"])
    if len(parts) == 6:
        if start_value <= 0 or stop_value <= 0:
            raise ValidationError([f"--axis: log spacing needs positive bounds in '{text}'"])
        return Axis.logspace(name, unit, start_value, stop_value, count)
    return Axis.linspace(name, unit, start_value, stop_value, count)


def time_grid(t_end_us: float, samples: int) -> tuple:
    if t_end_us <= 0 or samples < 2:
        raise ValidationError(["--t-end must be positive and --samples at least 2"])
    return tuple(float(t) for t in np.linspace(0.0, t_end_us * 1e-6, samples))


def _load(args) -> SystemConfig:
    config = load_config(args.config) if args.config else baseline_config()
    if args.full_linearization:
        config = config.with_updates(full_linearization=True)
    return config


def _workers(args) -> int:
    if args.workers is not None:
        if args.workers < 1:
            raise ValidationError(["--workers must be >= 1"])
        return args.workers
    return Config.default_workers()


def _log_label(base: str) -> str:
    return 'ln' if base == 'e' else 'log2'


# ===== КОМАНДЫ =====

def cmd_check(args) -> int:
    config = _load(args)
    print(f"✅ {args.config}: valid (config_hash={config_hash(config)})")
    for section, key, attribute, kind, _ in SCHEMA:
        owner = config.drive if section == 'drive' else config
        if owner is None:
            continue
        value = getattr(owner, attribute)
        if value is None:
            continue
        print(f"  [{section}] {key:16s} = {UnitHandler.format_quantity(value, kind)}")
    for attribute, value in config.site2:
        print(f"  [system] {FILE_KEYS[attribute] + '_2':16s} = {UnitHandler.format_frequency(value)}")
    flags = ', '.join(f"{name}={getattr(config, name)}"
                      for name in ('symmetric_sites', 'full_linearization', 'meanfield_shift'))
    print(f"  [flags] {flags}")
    return 0


def cmd_stability(args) -> int:
    config = _load(args)
    model, _ = build_linear_model(config)
    report = stability(model.K)
    print(f"{'✅ stable' if report.stable else '❌ unstable'}: "
          f"max Re(eig K) = {report.max_real_part:.6e} rad/s")
    for value in report.eigenvalues:
        print(f"  {value.real:+.6e} {value.imag:+.6e}i")
    return 0 if report.stable else 2


def cmd_steady(args) -> int:
    config = _load(args)
    base = args.log_base or Config.LOG_BASE
    model, point = build_linear_model(config)
    report = stability(model.K)
    if not report.stable:
        raise InstabilityError(f"drift matrix is unstable: max real part {report.max_real_part:.6e} rad/s",
                               max_real_part=report.max_real_part)

    covariance = steady_covariance(model.K, model.L, method=args.method)
    measures = measure_all(covariance.matrix)

    print(f"stable: True (max Re(eig K) = {report.max_real_part:.6e} rad/s)")
    print(f"lyapunov residual: {covariance.residual:.3e}")
    print(f"E_dd ({_log_label(base)}): {negativity_in_base(measures.E_dd, base):.10g}")
    print(f"purity: {measures.purity:.10g}")
    print(f"S_c: {measures.S_c:.10g}")
    print(f"S_p: {measures.S_p:.10g}")
    print(f"nu_minus: {measures.nu_minus:.10g}")
    print(f"min symplectic (all modes): {covariance.min_symplectic:.10g}")

    if args.dump:
        store = ResultStore(args.output)
        path = store.dump_arrays(
            [('K', model.K), ('L', model.L), ('C', covariance.matrix)],
            'steady.bin', config=config, ordering=ORDERING,
        )
        print(f"💾 {path}")
        if point is not None:
            payload = store.sidecar(config, operating_point=point.to_dict())
            print(f"💾 {store.write_json(payload, 'operating_point.json')}")
    return 0


def _write_and_report(result, args) -> int:
    store = ResultStore(args.output)
    csv_path, json_path = store.write_sweep(result)
    print(f"💾 {csv_path}")
    print(f"💾 {json_path}")
    print(f"rows: {len(result.rows)}, failed: {result.failed}")
    return 0


def cmd_evolve(args) -> int:
    config = _load(args)
    spec = SweepSpec(base=config, mode='evolve', time_grid=time_grid(args.t_end, args.samples), name='evolve')
    result = run_sweep(spec, workers=1)
    last = result.rows[-1]
    base = args.log_base or Config.LOG_BASE
    if not last['error']:
        print(f"t = {last['t[us]']:.6g} us: E_dd ({_log_label(base)}) = "
              f"{negativity_in_base(last['E_dd'], base):.6g}, purity = {last['purity']:.6g}, "
              f"S_c = {last['S_c']:.6g}, S_p = {last['S_p']:.6g}")
    return _write_and_report(result, args)


def cmd_sweep(args) -> int:
    config = _load(args)
    axes = tuple(parse_axis(text) for text in args.axis)
    grid = time_grid(args.t_end, args.samples) if args.mode == 'evolve' else ()
    spec = SweepSpec(base=config, axes=axes, mode=args.mode, time_grid=grid, name=args.name)
    return _write_and_report(run_sweep(spec, workers=_workers(args)), args)


def cmd_figure(args) -> int:
    config = _load(args)
    spec = figure_preset(args.name, base=config, resolution=args.points)
    return _write_and_report(run_sweep(spec, workers=_workers(args)), args)


HANDLERS = {
    'check': cmd_check,
    'stability': cmd_stability,
    'steady': cmd_steady,
    'evolve': cmd_evolve,
    'sweep': cmd_sweep,
    'figure': cmd_figure,
}


def _report(error: SimulatorError) -> int:
    print(json.dumps(error.to_dict(), sort_keys=True), file=sys.stderr)
    return error.exit_code


def main(argv: Optional[Sequence[str]] = None) -> int:
    """Разобрать аргументы, выполнить команду, вернуть код выхода"""
    try:
        args = build_parser().parse_args(list(argv) if argv is not None else None)
    except SimulatorError as e:
        return _report(e)
    except SystemExit as e:
        # --help / --version
        return int(e.code or 0)

    try:
        Config.validate()
    except ValueError as e:
        return _report(ValidationError([f"settings: {e}"]))
    if args.log_level is not None:
        try:
            Config.check_log_level(args.log_level)
        except ValueError as e:
            return _report(ValidationError([f"--log-level: {e}"]))
    Config.setup_logging(args.log_level)
    logger.debug(f"Command {args.command} with {vars(args)}")

    try:
        return HANDLERS[args.command](args)
    except SimulatorError as e:
        logger.error(f"❌ {args.command} failed: {e.message}")
        return _report(e)


if __name__ == '__main__':
    sys.exit(main())
