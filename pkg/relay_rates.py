#!/usr/bin/env python3
"""
Command-line front end: single-network rates, relay-position sweeps,
verification suites and moment simulations.

Exit codes: 0 success, 1 invalid input, 2 verification failure, 3 I/O error.
"""

import argparse
import logging
import os
import sys
from collections import Counter
from typing import List, Optional

from errors import ConfigurationError, RelayBoundsError
from models import parse_relay_counts
from strategies.amplify_forward import max_gains
from utils.io_formats import (load_json, load_network, parse_sweep_documents, rate_summary,
                              save_json, write_csv, write_curve)
from utils.montecarlo import SimRun, simulate
from utils.name_matching import resolve_name
from utils.sweeps import RateCurve, compare_relay_counts, run_sweep
from utils.verification import SUITES, run_suite

logger = logging.getLogger(__name__)

VERBS = ('rate', 'sweep', 'verify', 'simulate')
FORMATS = ('csv', 'json', 'svg')

EXIT_OK = 0
EXIT_INVALID = 1
EXIT_VERIFICATION = 2
EXIT_IO = 3


class ArgumentParser(argparse.ArgumentParser):
    """Reports usage errors as invalid input instead of exiting with argparse's status 2"""

    def error(self, message):
        raise ConfigurationError(message)


def build_parser() -> ArgumentParser:
    parser = ArgumentParser(
        prog='relay_rates.py',
        description='Capacity bounds and achievable rates of parallel-relay AWGN links',
    )
    parser.add_argument('verb', help='one of: ' + ', '.join(VERBS))
    parser.add_argument('--config', help='network or sweep JSON document')
    parser.add_argument('--out', help='output path (stdout when omitted)')
    parser.add_argument('--format', default=None, help='csv, json or svg (svg: sweep only)')
    parser.add_argument('--seed', type=int, default=0, help='seed of every random draw')
    parser.add_argument('--trials', type=int, default=200,
                        help='verification trials (per relay count for cut-reduction)')
    parser.add_argument('--suite', help='verification suite: ' + ', '.join(SUITES))
    parser.add_argument('--relays', help="relay counts to compare, e.g. '1,2'")
    parser.add_argument('--workers', type=int, default=1, help='worker processes')
    parser.add_argument('--blocks', type=int, default=1000, help='simulated blocks')
    parser.add_argument('--samples', type=int, default=1000, help='samples per block')
    parser.add_argument('-v', '--verbose', action='count', default=0)
    return parser


def load_config():
    """Load the default sweep list from config.json"""
    config_path = os.path.join(os.path.dirname(os.path.abspath(__file__)), 'config.json')
    if os.path.exists(config_path):
        return load_json(config_path)
    return {"sweeps": {}}


def banner(title: str):
    print(f"\n{'='*60}")
    print(title)
    print(f"{'='*60}")


def _sweep_specs(args):
    data = load_json(args.config) if args.config else load_config()
    specs = parse_sweep_documents(data)
    if not specs:
        logger.warning("no active sweeps found")
    return specs


def _output_path(out: Optional[str], name: str, many: bool) -> Optional[str]:
    if not out or not many:
        return out
    stem, ext = os.path.splitext(out)
    return f"{stem}_{name}{ext}"


def cmd_rate(args) -> int:
    if not args.config:
        raise ConfigurationError("the rate command needs a network document", field='config')
    fmt = resolve_name('format', args.format or 'json', FORMATS)
    if fmt == 'svg':
        raise ConfigurationError("svg output is only available for sweeps", field='format')

    document = load_network(args.config)
    summary = rate_summary(document.config, document.beta)
    if fmt == 'json':
        save_json(summary, args.out)
    else:
        columns = ['direct', 'cutset', 'rho_star', 'binding_cut', 'af', 'mrc', 'parallel']
        write_csv(columns, [[summary[c] for c in columns]], args.out)

    if args.out:
        banner("RATE SUMMARY [bps/Hz]")
        print(f"Relays: {document.config.num_relays}")
        for key in ('direct', 'cutset', 'af', 'mrc', 'parallel'):
            print(f"  {key}: {summary[key]:.6f}")
        print(f"  rho*: {summary['rho_star']:.6f} (binding {summary['binding_cut']})")
        print(f"\nSaved rate summary to {args.out}")
    return EXIT_OK


def _print_curve_statistics(curve: RateCurve):
    banner(f"SWEEP {curve.name}: {len(curve.rows)} positions")
    for strategy in curve.strategies:
        values = curve.column(strategy)
        print(f"  {strategy}: min {min(values):.4f}  max {max(values):.4f}")
    if 'af' in curve.strategies and 'mrc' in curve.strategies:
        better = sum(a > m for a, m in zip(curve.column('af'), curve.column('mrc')))
        print(f"\nAF above MRC at {better} of {len(curve.rows)} positions")
    if 'cutset' in curve.strategies:
        bindings = Counter(row.binding for row in curve.rows)
        print("\nBinding cuts:")
        for label, count in bindings.most_common():
            print(f"  {label}: {count}")


def cmd_sweep(args) -> int:
    fmt = resolve_name('format', args.format or 'csv', FORMATS)
    specs = _sweep_specs(args)
    counts = parse_relay_counts(args.relays) if args.relays else None
    if counts and fmt == 'svg':
        raise ConfigurationError("svg output is only available for rate curves", field='format')

    for spec in specs:
        path = _output_path(args.out, spec.name, len(specs) > 1)
        if counts:
            table = compare_relay_counts(spec, counts, workers=args.workers)
            write_curve(table, fmt, path)
            if path:
                banner(f"RELAY COUNTS {spec.name}: {', '.join(map(str, counts))}")
                print(f"  {table.note}")
                ratio = [r for r in (table.ratio() or []) if r is not None]
                if ratio:
                    print(f"  two/one cutset ratio: min {min(ratio):.4f}  max {max(ratio):.4f}")
        else:
            curve = run_sweep(spec, workers=args.workers)
            write_curve(curve, fmt, path)
            if path:
                _print_curve_statistics(curve)
        if path:
            print(f"\nSaved {spec.name} to {path}")
    return EXIT_OK


def cmd_verify(args) -> int:
    if not args.suite:
        raise ConfigurationError("choose a suite with --suite", field='suite')
    suite = resolve_name('suite', args.suite, SUITES)
    sweeps = _sweep_specs(args) if suite == 'upper-bound-ordering' else ()
    report = run_suite(suite, seed=args.seed, trials=args.trials, workers=args.workers,
                       sweeps=sweeps, blocks=args.blocks, samples=args.samples)
    save_json(report.to_dict(), args.out)

    if args.out:
        banner(f"VERIFICATION {suite}")
        print(f"Trials: {len(report.trials)}  failures: {len(report.failures)}")
        print(f"Worst deviation: {report.worst_deviation:.3e}")
        if report.findings:
            print(f"Findings: {len(report.findings)}")
        print(f"\nSaved report to {args.out}")
    return EXIT_OK if report.passed else EXIT_VERIFICATION


def cmd_simulate(args) -> int:
    if not args.config:
        raise ConfigurationError("the simulate command needs a network document", field='config')
    document = load_network(args.config)
    if document.mode == 'af':
        run = SimRun(seed=args.seed, num_blocks=args.blocks, samples_per_block=args.samples,
                     config=document.config, gains=document.beta or max_gains(document.config))
    else:
        run = SimRun(seed=args.seed, num_blocks=args.blocks, samples_per_block=args.samples,
                     config=document.config, corr=document.correlation())
    report = simulate(run)
    save_json(report.to_dict(), args.out)

    if args.out:
        banner(f"MOMENTS ({report.mode}, {run.total_samples} samples)")
        for check in report.checks:
            status = 'ok' if check.passed else 'FAIL'
            print(f"  {check.name}: {check.empirical:.6g} vs {check.predicted:.6g} "
                  f"({check.deviation:+.2f} sigma) {status}")
        print(f"\nSaved report to {args.out}")
    return EXIT_OK if report.passed else EXIT_VERIFICATION


COMMANDS = {
    'rate': cmd_rate,
    'sweep': cmd_sweep,
    'verify': cmd_verify,
    'simulate': cmd_simulate,
}


def main(argv: Optional[List[str]] = None) -> int:
    """Main entry point"""
    try:
        args = build_parser().parse_args(argv)
        level = logging.WARNING - 10 * min(args.verbose, 2)
        logging.basicConfig(level=level, format='%(levelname)s %(name)s: %(message)s')
        verb = resolve_name('verb', args.verb, VERBS)
        if args.workers < 1:
            raise ConfigurationError("must be >= 1", field='workers')
        if args.seed < 0:
            raise ConfigurationError("must be >= 0", field='seed')
        return COMMANDS[verb](args)
    except RelayBoundsError as e:
        print(f"Error: {e}", file=sys.stderr)
        return EXIT_INVALID
    except OSError as e:
        print(f"I/O error: {e}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
