"""Command line front-end.

    corrnum enumerate --rank 2 --n-max 8
    corrnum spectrum --config run.json --out out/
    corrnum correlate --config run.json --threads 8
    corrnum correlate --demo pinching
"""

import argparse
import csv
import json
import logging
import os
import sys
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np

from . import __version__
from .config import RunConfig, grid_values, load_config, parameter_hash
from .errors import *
from .freegroup import class_count, enumerate_classes, primitive_class_count
from .growth import entropy
from .manhattan import (check_proportional, compare_lengths, correlate, correlation_count, entropy_systole_product,
                        joint_horizon, pinching_demo, sample_curve)
from .spectrum import SpectrumTable, compute_spectrum, load_table, save_table
from .utils import fmt17, sha256_file

__all__ = [
    "main",
    "cmd_enumerate",
    "cmd_spectrum",
    "cmd_entropy",
    "cmd_manhattan",
    "cmd_correlate",
    "cmd_demo",
]

log = logging.getLogger(__name__)

SPECTRUM_FILES = ("spectrum.csv", "spectrum.json")


def _out(config: RunConfig, name: str) -> str:
    os.makedirs(config.output, exist_ok=True)
    return os.path.join(config.output, name)


def _write_text(path: str, text: str) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        f.write(text)


def _write_csv(path: str, header: Sequence[str], rows: Sequence[Sequence[Any]]) -> None:
    with open(path, "w", encoding="utf-8", newline="") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(header)
        writer.writerows(rows)


def _json(doc: Any) -> str:
    return json.dumps(doc, indent=2, sort_keys=True) + "\n"


def _write_manifest(config: RunConfig, names: Sequence[str]) -> None:
    """List the files written by this run with their SHA-256."""

    files = {name: sha256_file(os.path.join(config.output, name)) for name in sorted(set(names))}
    _write_text(_out(config, "manifest.json"), _json({"version": __version__, "files": files}))


def _fmt(x: Optional[float]) -> str:
    return "" if x is None or not np.isfinite(x) else fmt17(float(x))


def cmd_enumerate(config: RunConfig) -> int:
    """Class tally per length against the count oracle.

    Raises:
        CountMismatchError: Tally differs from the oracle.
    """

    words: Dict[int, int] = {}
    classes: Dict[int, int] = {}
    for c in enumerate_classes(config.rank, config.n_max, config.include_powers, max_classes=config.max_classes):
        n = len(c)
        classes[n] = classes.get(n, 0) + 1
        words[n] = words.get(n, 0) + c.period

    for n in range(1, config.n_max + 1):
        if config.include_powers:
            expected_words, expected = class_count(config.rank, n)
        else:
            expected_words, expected = None, primitive_class_count(config.rank, n)
        got = classes.get(n, 0)
        if got != expected:
            raise CountMismatchError(n, expected, got)
        if expected_words is not None and words.get(n, 0) != expected_words:
            raise CountMismatchError(n, expected_words, words.get(n, 0))
        print(f"n={n}: {words.get(n, 0)} words, {got} classes")
    return 0


def _spectrum(config: RunConfig) -> SpectrumTable:
    """Cached table, recomputed when the parameter hash of the meta file differs."""

    csv_path, meta_path = _out(config, "spectrum.csv"), _out(config, "spectrum.json")
    key = parameter_hash(config, __version__)
    if os.path.exists(csv_path) and os.path.exists(meta_path):
        with open(meta_path, encoding="utf-8") as f:
            try:
                cached = json.load(f).get("parameter_hash")
            except json.JSONDecodeError:
                cached = None
        if cached == key:
            log.info("cache hit %s", key[:12])
            print("cache hit")
            return load_table(csv_path)

    table = compute_spectrum(config.columns(), config.rank, config.n_max, config.include_powers,
                             threads=config.threads, force=config.force, pilot_n=config.pilot_n,
                             seed=config.seed, max_classes=config.max_classes)
    table.meta["parameter_hash"] = key
    table.meta["version"] = __version__
    save_table(table, csv_path)
    log.info("wrote %s", csv_path)
    print(f"{len(table)} rows, {table.meta['dropped']} dropped")
    return table


def cmd_spectrum(config: RunConfig) -> int:
    """Joint spectrum table, cached by parameter hash."""

    _spectrum(config)
    _write_manifest(config, SPECTRUM_FILES)
    return 0


def _entropies(config: RunConfig, table: SpectrumTable, columns: Sequence[int], written: List[str]) -> List[float]:
    values = []
    for i in columns:
        est = entropy(table, i, policy=config.window_policy())
        _write_text(_out(config, f"entropy_{i}.json"), est.to_json())
        written.append(f"entropy_{i}.json")
        print(f"h[{table.columns[i].header}] = {est.value:.6f} +- {est.stderr:.2g}")
        values.append(est.value)
    return values


def cmd_entropy(config: RunConfig) -> int:
    """Entropy of every column."""

    table = _spectrum(config)
    written = list(SPECTRUM_FILES)
    _entropies(config, table, range(len(table.columns)), written)
    _write_manifest(config, written)
    return 0


def _write_curve(config: RunConfig, curve: Any) -> None:
    _write_csv(_out(config, "curve.csv"), ["b", "a", "stderr"],
               [[_fmt(b), _fmt(a), _fmt(s)] for b, a, s in curve.samples])


def _pair(config: RunConfig, table: SpectrumTable) -> Tuple[int, int]:
    """Configured column pair, rejected early when proportional."""

    i1, i2 = (table.column_index(i) for i in config.pair)
    kappa, residual, proportional = check_proportional(table.values[:, i1], table.values[:, i2])
    if proportional and not config.force:
        raise ProportionalSpectraError(kappa, residual)
    return i1, i2


def cmd_manhattan(config: RunConfig) -> int:
    """Manhattan curve samples of the configured pair."""

    table = _spectrum(config)
    i1, i2 = _pair(config, table)
    written = list(SPECTRUM_FILES) + ["curve.csv"]
    h1, h2 = _entropies(config, table, [i1, i2], written)
    curve = sample_curve(table, i1, i2, grid_values(config.b_grid, h2), h1=h1, h2=h2,
                         policy=config.window_policy(), force=config.force, threads=config.threads)
    _write_curve(config, curve)
    _write_manifest(config, written)
    print(f"a(0) = {curve.a_at_zero:.6f}, root = {curve.root:.6f}, convexity {curve.convexity_certificate:.2g}")
    return 0


def cmd_correlate(config: RunConfig) -> int:
    """Full correlation pipeline of the configured pair."""

    table = _spectrum(config)
    i1, i2 = _pair(config, table)
    policy = config.window_policy()
    written = list(SPECTRUM_FILES) + ["curve.csv", "curve_plot.csv", "correlation.json"]
    h1, h2 = _entropies(config, table, [i1, i2], written)
    l1, l2 = table.values[:, i1], table.values[:, i2]
    report = correlate(table, i1, i2, b_grid=grid_values(config.b_grid, h2), epsilon=config.epsilon,
                       x_grid=grid_values(config.x_grid, joint_horizon(table, h1 * l1, h2 * l2)), policy=policy,
                       force=config.force, threads=config.threads)
    curve, fit = report.curve, report.countfit

    doc = report.to_dict()
    doc["comparison"] = compare_lengths(table, i1, i2, h1, h2).to_dict()
    sys_, h_sum, product = entropy_systole_product(table, [i1, i2], policy=policy)
    doc["sum_spectrum"] = {"systole": sys_, "entropy": h_sum, "product": product}
    if not config.renormalized:
        raw = correlation_count(table, i1, i2, h1, h2, config.epsilon,
                                grid_values(config.x_grid, joint_horizon(table, l1, l2)), renormalized=False)
        doc["raw_countfit"] = raw.to_dict()

    _write_curve(config, curve)
    marks = [["sample", _fmt(b), _fmt(a)] for b, a, _ in curve.samples]
    marks += [["endpoint", "0", _fmt(curve.a_at_zero)], ["endpoint", _fmt(curve.root), "0"],
              ["tangent", _fmt(report.tangent_point[1]), _fmt(report.tangent_point[0])]]
    _write_csv(_out(config, "curve_plot.csv"), ["kind", "b", "a"], marks)

    if fit is not None:
        rows = []
        for x, n in zip(fit.x.tolist(), fit.counts.tolist()):
            y = np.log(n * x ** 1.5) if n > 0 else None
            line = np.log(fit.C) + fit.M * x if fit.M is not None else None
            rows.append([_fmt(x), n, _fmt(y), _fmt(line)])
        _write_csv(_out(config, "countfit_plot.csv"), ["x", "count", "log_count_x32", "fit"], rows)
        written.append("countfit_plot.csv")

    _write_text(_out(config, "correlation.json"), _json(doc))
    _write_manifest(config, written)
    countfit = "n/a" if report.M_countfit is None else f"{report.M_countfit:.6f}"
    print(f"M_tangent = {report.M_tangent:.6f}, M_mins = {report.M_mins:.6f}, M_countfit = {countfit}")
    print(f"J_12 = {report.J_12:.6f}, J_21 = {report.J_21:.6f}, consistent: {report.consistent}")
    return 0


def cmd_demo(config: RunConfig) -> int:
    """Correlation along a pinching family of Schottky pairs."""

    params = config.demo_params()
    report = pinching_demo(params["epsilons"], params["K"], params["angle"], n_max=params["n_max"],
                           policy=config.window_policy(), threads=config.threads, seed=config.seed)
    _write_text(_out(config, "pinching.json"), report.to_json())
    _write_manifest(config, ["pinching.json"])
    for eps, m, s in zip(report.epsilons, report.M, report.systoles):
        print(f"eps={eps:g}: M = {'failed' if m is None else f'{m:.6f}'}, sum systole = {s:.6f}")
    print(f"M decreasing: {report.m_decreasing}, systole increasing: {report.systole_increasing}")
    return 0


COMMANDS: Dict[str, Callable[[RunConfig], int]] = {
    "enumerate": cmd_enumerate,
    "spectrum": cmd_spectrum,
    "entropy": cmd_entropy,
    "manhattan": cmd_manhattan,
    "correlate": cmd_correlate,
    "demo": cmd_demo,
}


def _parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", metavar="PATH", help="JSON run configuration")
    common.add_argument("--out", metavar="DIR", help="output directory")
    common.add_argument("--threads", type=int, metavar="N", help="worker threads")
    common.add_argument("--seed", type=int, metavar="N", help="seed of sampling-based validations")
    common.add_argument("--force", action="store_const", const=True, help="continue past failed validations")
    common.add_argument("--rank", type=int, help="free group rank")
    common.add_argument("--n-max", type=int, dest="n_max", help="word length cutoff")
    common.add_argument("--epsilon", type=float, help="window width of the count fit")
    common.add_argument("--primitive-only", action="store_const", const=False, dest="include_powers",
                        help="drop proper powers")
    common.add_argument("-v", "--verbose", action="count", default=0, help="more logging, repeatable")

    parser = argparse.ArgumentParser(prog="corrnum", description="Length spectra and correlation numbers.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, fn in COMMANDS.items():
        p = sub.add_parser(name, parents=[common], help=next(iter((fn.__doc__ or "").strip().splitlines()), None))
        if name == "correlate":
            p.add_argument("--demo", choices=["pinching"], help="run a named demonstration instead")
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = _parser().parse_args(argv)
    logging.basicConfig(level=max(logging.WARNING - 10 * args.verbose, logging.DEBUG),
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        config = load_config(args.config).with_overrides(
            output=args.out, threads=args.threads, seed=args.seed, force=args.force, rank=args.rank,
            n_max=args.n_max, epsilon=args.epsilon, include_powers=args.include_powers)
        if config.threads < 1 or config.n_max < 1 or config.rank < 2 or not config.epsilon > 0:
            raise ConfigError("", "threads, n_max, rank and epsilon out of range")
        command = "demo" if getattr(args, "demo", None) == "pinching" else args.command
        return COMMANDS[command](config)
    except CorrError as e:
        print(f"error: {e}", file=sys.stderr)
        return e.exit_code
