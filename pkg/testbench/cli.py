#!/usr/bin/env python3
"""
Command-line front end.

    python -m testbench sweep --config configs/reduced.yaml --out results/nmse.csv
    python -m testbench demo --snr 5
    python -m testbench selftest
    python -m testbench complexity --subcarriers 64 --antennas 16
"""

import argparse
import logging
import os
import sys
from dataclasses import replace
from typing import List, Optional

from testbench.bench.complexity import complexity_report, format_report
from testbench.bench.experiment import run_demo, run_sweep
from testbench.bench.report import write_fit_trace, write_loss_traces, write_report
from testbench.bench.selftest import SUITES, run_selftest
from testbench.config_handler import ConfigHandler, apply_overrides, parse_list, parse_snr_list
from testbench.defaults_config import METHODS
from testbench.errors import ConfigError, TestbenchError

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_USAGE = 2


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog='testbench',
        description='One-bit massive MIMO channel-estimation testbench')
    parser.add_argument('--log-level', default='INFO',
                        choices=['DEBUG', 'INFO', 'WARNING', 'ERROR'],
                        help='Diagnostic verbosity (stderr)')
    sub = parser.add_subparsers(dest='command', metavar='COMMAND')
    sub.required = True

    sweep = sub.add_parser('sweep', help='NMSE versus SNR for the configured methods')
    sweep.add_argument('--config', required=True, help='YAML experiment config')
    sweep.add_argument('--out', help='CSV report path (default: experiment.output)')
    sweep.add_argument('--seed', type=int, help='Master seed, overrides the config')
    sweep.add_argument('--methods', help=f"Comma list from {','.join(METHODS)}")
    sweep.add_argument('--snr', help='Comma list of SNR points in dB')
    sweep.add_argument('--workers', type=int, help='Realizations run concurrently')
    sweep.add_argument('--timing', action='store_true',
                       help='Record measured wall time (the CSV is then no longer reproducible)')

    demo = sub.add_parser('demo', help='One realization at one SNR, per-stage NMSE')
    demo.add_argument('--config', help='YAML experiment config (defaults if omitted)')
    demo.add_argument('--snr', type=float, help='SNR in dB (default: first sweep point)')
    demo.add_argument('--seed', type=int, help='Master seed, overrides the config')
    demo.add_argument('--realization', type=int, default=0)
    demo.add_argument('--traces', help='Directory for stage-1 and DIP loss-trace CSVs')

    selftest = sub.add_parser('selftest', help='Run the invariant suites')
    selftest.add_argument('--suite', action='append', choices=list(SUITES),
                          help='Run only this suite (repeatable)')

    complexity = sub.add_parser('complexity', help='Parameter counts for both stages')
    complexity.add_argument('--config', help='YAML experiment config')
    complexity.add_argument('--subcarriers', type=int)
    complexity.add_argument('--antennas', type=int)
    return parser


def cmd_sweep(args: argparse.Namespace, handler: ConfigHandler) -> int:
    cfg = handler.load_experiment(args.config)
    cfg = apply_overrides(
        cfg,
        seed=args.seed,
        methods=parse_list(args.methods) if args.methods else None,
        snr_db=parse_snr_list(args.snr) if args.snr else None,
        output=args.out,
    )
    if args.workers is not None or args.timing:
        cfg = replace(cfg, workers=args.workers or cfg.workers, timing=args.timing or cfg.timing)
    report = run_sweep(cfg)
    write_report(report, cfg.output)
    print(cfg.output)
    return EXIT_OK


def cmd_demo(args: argparse.Namespace, handler: ConfigHandler) -> int:
    cfg = handler.load_experiment(args.config)
    cfg = apply_overrides(cfg, seed=args.seed)
    result = run_demo(cfg, snr_db=args.snr, realization=args.realization)
    for label, value in result.nmse_db.items():
        print(f"{label:<12} NMSE {value:9.3f} dB")
    if args.traces:
        os.makedirs(args.traces, exist_ok=True)
        write_loss_traces(os.path.join(args.traces, 'stage1_loss.csv'), result.stage1_traces)
        write_fit_trace(os.path.join(args.traces, 'dip_loss.csv'), result.fit_trace)
        logger.info("Wrote loss traces to %s", args.traces)
    return EXIT_OK


def cmd_selftest(args: argparse.Namespace, handler: ConfigHandler) -> int:
    results = run_selftest(args.suite)
    for result in results:
        print(result.line())
    return EXIT_OK if all(r.passed for r in results) else EXIT_FAILURE


def cmd_complexity(args: argparse.Namespace, handler: ConfigHandler) -> int:
    cfg = handler.load_experiment(args.config)
    subcarriers = args.subcarriers or cfg.system.subcarriers
    antennas = args.antennas or cfg.system.antennas
    same_geometry = (subcarriers, antennas) == (cfg.system.subcarriers, cfg.system.antennas)
    report = complexity_report(subcarriers, antennas, cfg.dip if same_geometry else None)
    print(format_report(report))
    return EXIT_OK


COMMANDS = {
    'sweep': cmd_sweep,
    'demo': cmd_demo,
    'selftest': cmd_selftest,
    'complexity': cmd_complexity,
}


def cli_main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return EXIT_OK if e.code in (0, None) else EXIT_USAGE

    logging.basicConfig(level=getattr(logging, args.log_level),
                        format='%(asctime)s %(levelname)s %(name)s: %(message)s',
                        stream=sys.stderr)
    try:
        return COMMANDS[args.command](args, ConfigHandler())
    except ConfigError as e:
        parser.print_usage(sys.stderr)
        print(f"testbench: error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except TestbenchError as e:
        print(f"testbench: {type(e).__name__}: {e}", file=sys.stderr)
        return EXIT_FAILURE
    except OSError as e:
        print(f"testbench: I/O error: {e}", file=sys.stderr)
        return EXIT_FAILURE


def main() -> None:
    sys.exit(cli_main())


if __name__ == '__main__':
    main()
