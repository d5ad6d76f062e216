"""Command-line driver.

Subcommands::

    weakamp fig2          sweep CSV: p, gain, density_weak, density_exact, fidelity
    weakamp table1        fidelity and success probability for the three weak-model rows
    weakamp impossibility maximal truncated-amplifier success probability vs N
    weakamp weakness      per-photon-number weakness residuals at one outcome

Configuration file: flat ``key = value`` lines (``#`` comments) with keys
alpha, beta, kappa_t, truncation, p_min, p_max, p_step, window_lo,
window_hi, out.  Command-line flags override file values.  Numbers are
written with 6 significant digits so identical inputs give identical bytes.
"""

from __future__ import annotations

import argparse
import configparser
import csv
import math
import os
import sys
from contextlib import contextmanager
from dataclasses import replace
from pathlib import Path

from . import amplifier, kerr
from .errors import ConfigError, WeakAmpError
from .fock import coherent

CONFIG_KEYS = {
    "alpha": ("alpha", float),
    "beta": ("beta", float),
    "kappa_t": ("kappa_T", float),
    "truncation": ("N", int),
    "p_min": ("p_min", float),
    "p_max": ("p_max", float),
    "p_step": ("p_step", float),
    "window_lo": ("window_lo", float),
    "window_hi": ("window_hi", float),
}

# Weak-model rows (kappa_T, beta); the linear-optics rows are quoted, never computed.
TABLE1_ROWS = ((4e-5, 0.2), (2e-5, 0.2), (2e-5, 0.5))
TABLE1_CITED = (
    ("linear optics", "0.2", "", ">0.999", "0.005", "", "cited reference value, not computed"),
    ("linear optics", "0.5", "", "~0.99", "0.005", "", "cited reference value, not computed"),
)


def _fmt(x) -> str:
    return f"{x:.6g}"


def read_config_file(path: str) -> dict:
    """Parse a flat key-value file into raw string values."""
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc.strerror}") from exc
    parser = configparser.ConfigParser(inline_comment_prefixes=("#",))
    try:
        parser.read_string("[run]\n" + text, source=path)
    except configparser.Error as exc:
        raise ConfigError(f"malformed config {path}: {exc}") from exc
    values = dict(parser["run"])
    unknown = set(values) - set(CONFIG_KEYS) - {"out"}
    if unknown:
        raise ConfigError(f"unknown config keys in {path}: {', '.join(sorted(unknown))}")
    return values


def build_config(args: argparse.Namespace) -> tuple[kerr.ProtocolConfig, str]:
    raw = read_config_file(args.config) if args.config else {}
    for key in list(CONFIG_KEYS) + ["out"]:
        flag = getattr(args, key, None)
        if flag is not None:
            raw[key] = flag
    kwargs = {}
    for key, (field_name, kind) in CONFIG_KEYS.items():
        if key in raw:
            try:
                kwargs[field_name] = kind(raw[key])
            except ValueError as exc:
                raise ConfigError(f"bad value for {key}: {raw[key]!r}") from exc
    cfg = kerr.ProtocolConfig(**kwargs)
    if cfg.kappa_T > 0 or cfg.window_hi is not None:
        cfg.validate_window()
    return cfg, str(raw.get("out", "-"))


@contextmanager
def _output(path: str):
    if path == "-":
        yield sys.stdout
        return
    try:
        fh = open(path, "w", newline="")
    except OSError as exc:
        raise ConfigError(f"cannot write {path}: {exc.strerror}") from exc
    with fh:
        yield fh


def cmd_fig2(args) -> int:
    cfg, out = build_config(args)
    records = kerr.sweep(cfg)
    with _output(out) as fh:
        kerr.write_csv(records, fh)
    return 0


def cmd_table1(args) -> int:
    base, out = build_config(args)
    with _output(out) as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(("model", "beta", "kappa_t", "fidelity_min", "p_s_weak", "p_s_exact", "note"))
        for kappa_T, beta in TABLE1_ROWS:
            cfg = replace(base, kappa_T=kappa_T, beta=beta, window_hi=None)
            ps = kerr.success_probability(cfg)
            w.writerow(
                ("weak model", _fmt(beta), _fmt(kappa_T), _fmt(kerr.min_window_fidelity(cfg)),
                 _fmt(ps.weak), _fmt(ps.exact), "computed")
            )
        w.writerows(TABLE1_CITED)
    return 0


def cmd_impossibility(args) -> int:
    g, n_max = args.gain, args.n_max
    if g < 1:
        raise ConfigError("gain must be >= 1")
    probe = coherent(args.beta, max(n_max, 40))
    with _output(args.out or "-") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(("N", "c_n_sq", "success_probability", "ratio"))
        prev = None
        for N in range(n_max + 1):
            op = amplifier.truncated_amplifier(N, g) if g > 1 else amplifier.GainOperator(g=1.0, c=1.0, N=N)
            ps = op.success_probability(probe)
            ratio = "" if prev is None else _fmt(ps / prev)
            w.writerow((N, _fmt(abs(op.c) ** 2), _fmt(ps), ratio))
            prev = ps
    return 0


def cmd_weakness(args) -> int:
    cfg, out = build_config(args)
    p = cfg.window_lo if args.p is None else args.p
    r = kerr.weakness_residuals(cfg, p)
    with _output(out) as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(("n", "residual"))
        for n, val in enumerate(r):
            w.writerow((n, _fmt(val)))
        w.writerow(("max", _fmt(r.max())))
    return 0


def _add_config_flags(p: argparse.ArgumentParser):
    p.add_argument("--config", help="flat key = value configuration file")
    p.add_argument("--alpha", type=float)
    p.add_argument("--beta", type=float)
    p.add_argument("--kappa-t", dest="kappa_t", type=float)
    p.add_argument("--truncation", type=int)
    p.add_argument("--p-min", dest="p_min", type=float)
    p.add_argument("--p-max", dest="p_max", type=float)
    p.add_argument("--p-step", dest="p_step", type=float)
    p.add_argument("--window-lo", dest="window_lo", type=float)
    p.add_argument("--window-hi", dest="window_hi", type=float)
    p.add_argument("--out", help="output path ('-' for stdout)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="weakamp", description=__doc__.split("\n")[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("fig2", help="gain / density / fidelity sweep as CSV")
    _add_config_flags(p)
    p.set_defaults(func=cmd_fig2)

    p = sub.add_parser("table1", help="weak-model rows of the comparison table")
    _add_config_flags(p)
    p.set_defaults(func=cmd_table1)

    p = sub.add_parser("impossibility", help="success probability of the maximal truncated amplifier")
    p.add_argument("--gain", type=float, default=math.sqrt(2.0))
    p.add_argument("--n-max", dest="n_max", type=int, default=10)
    p.add_argument("--beta", type=float, default=0.2, help="probe coherent amplitude")
    p.add_argument("--out")
    p.set_defaults(func=cmd_impossibility)

    p = sub.add_parser("weakness", help="weakness residuals r_n at one homodyne outcome")
    _add_config_flags(p)
    p.add_argument("--p", type=float, help="homodyne outcome (default: window_lo)")
    p.set_defaults(func=cmd_weakness)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except WeakAmpError as exc:
        print(f"weakamp {args.command}: error: {exc}", file=sys.stderr)
        return 2
    except BrokenPipeError:
        # downstream closed early (e.g. `| head`); silence the flush at exit
        os.dup2(os.open(os.devnull, os.O_WRONLY), sys.stdout.fileno())
        return 0


if __name__ == "__main__":
    sys.exit(main())
