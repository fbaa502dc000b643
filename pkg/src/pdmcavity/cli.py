"""Command-line entry point: ``pdmcavity <mode> [options]``.

Every mode writes comma-separated output with a ``#`` comment header to stdout or
``--output``. Exit status: 0 on success, 1 on an invalid configuration, 2 when any
grid point hit a computation error (one ``error: code=...`` line per code on stderr).
"""
from __future__ import annotations

import argparse
import csv
import datetime
import io
import math
import platform
import re
import sys
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from . import __version__
from .errors import (
    AmbiguousMatchError,
    ConvergenceError,
    DegenerateCouplingError,
    NearDegeneracyError,
    PdmCavityError,
    TruncationError,
)
from .model import SystemParams, lowest_labels, parse_level
from .molecules import default_catalog, find, params_for, read_catalog
from .observables import QUANTITIES, sweep, table1
from .perturbation import validity_metrics

EXIT_OK, EXIT_CONFIG, EXIT_COMPUTE = 0, 1, 2
COMPUTE_CODES = frozenset(e.code for e in (
    NearDegeneracyError, ConvergenceError, AmbiguousMatchError,
    DegenerateCouplingError, TruncationError))
MODES = ("spectrum", "populations", "bs-shift", "table1", "sweep", "validate")
SWEEP_COLUMNS = ("f", "alpha", "delta", "level", "quantity", "engine", "value", "error")


class ConfigError(Exception):
    """Invalid command line or config file."""


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise ConfigError(message)


@dataclass
class RunConfig:
    mode: str
    f: tuple = (0.05,)
    alpha: tuple = (0.0,)
    delta: tuple = (0.0,)
    omega_c: float = 1.0
    molecule: Optional[str] = None
    transition: Optional[str] = None
    catalog: Optional[str] = None
    engines: tuple = ("dsp", "exact")
    order: int = 2
    levels: Optional[tuple] = None
    quantities: tuple = ("energy",)
    k_max: int = 5
    tol: Optional[float] = None
    n_max_start: int = 16
    output: Optional[str] = None
    timestamp: bool = True
    extra: dict = field(default_factory=dict)


def parse_grid(text: str) -> tuple:
    """``start:stop:count`` (inclusive linspace), a comma list, or one number."""
    text = str(text).strip()
    try:
        if ":" in text:
            parts = text.split(":")
            if len(parts) != 3:
                raise ValueError
            start, stop, count = float(parts[0]), float(parts[1]), int(parts[2])
            if count < 1:
                raise ConfigError(f"grid count must be >= 1 in {text!r}")
            if count == 1:
                return (start,)
            return tuple(float(x) for x in np.linspace(start, stop, count))
        values = tuple(float(x) for x in text.split(",") if x.strip())
    except ValueError:
        raise ConfigError(f"cannot parse grid {text!r}") from None
    if not values:
        raise ConfigError(f"empty grid {text!r}")
    if not all(math.isfinite(v) for v in values):
        raise ConfigError(f"non-finite value in grid {text!r}")
    return values


def _common(p: argparse.ArgumentParser):
    g = p.add_argument_group("parameters")
    g.add_argument("--f", "--f-grid", dest="f", default="0.05",
                   help="normalized coupling lam/omega_c (grid)")
    g.add_argument("--alpha", "--alpha-grid", dest="alpha", default="0",
                   help="permanent-dipole parameter (grid); ignored with --molecule")
    g.add_argument("--delta", "--delta-grid", dest="delta", default="0",
                   help="detuning omega_0 - omega_c in units of omega_c, or cm^-1 with --molecule")
    g.add_argument("--omega-c", type=float, default=1.0)
    g.add_argument("--molecule", help="catalog name or name:transition")
    g.add_argument("--transition")
    g.add_argument("--catalog", help="molecule CSV (default: $PDMCAVITY_CATALOG or bundled)")
    e = p.add_argument_group("engines")
    e.add_argument("--engine", choices=("dsp", "exact", "both"), default="both")
    e.add_argument("--order", type=int, default=2)
    e.add_argument("--levels", help="comma list such as g0,0-,0+")
    e.add_argument("--tol", type=float, help="exact-diag convergence tolerance")
    e.add_argument("--n-max-start", type=int, default=16)
    o = p.add_argument_group("output")
    o.add_argument("-o", "--output")
    o.add_argument("--no-timestamp", action="store_true")
    p.add_argument("--config", help="flat key=value file; command-line flags win")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="pdmcavity", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"pdmcavity {__version__}")
    sub = parser.add_subparsers(dest="mode", required=True, parser_class=_Parser)
    for mode, helptext in (
            ("spectrum", "level energies on a parameter grid"),
            ("populations", "bare-state populations of corrected levels"),
            ("bs-shift", "Bloch-Siegert shifts of transitions to g0"),
            ("sweep", "any set of quantities on a grid"),
            ("table1", "transition shifts for the molecule catalog"),
            ("validate", "perturbative validity metrics")):
        sp = sub.add_parser(mode, help=helptext)
        _common(sp)
        if mode == "populations":
            sp.add_argument("--level", help="shorthand for --levels with one label")
        if mode == "sweep":
            sp.add_argument("--quantities", default="energy",
                            help=f"comma list from {','.join(QUANTITIES)}")
        if mode == "validate":
            sp.add_argument("--k-max", type=int, default=5)
    return parser


def read_config(path) -> tuple:
    """Turn a ``key = value`` file into argument tokens (``mode`` is positional)."""
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    tokens, mode = [], None
    for num, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{num}: expected key=value")
        key, value = (s.strip() for s in line.split("=", 1))
        key = key.replace("_", "-")
        if key == "mode":
            mode = value
        elif key == "no-timestamp":
            if value.lower() in ("1", "true", "yes"):
                tokens.append("--no-timestamp")
        else:
            tokens.append(f"--{key}={value}")
    return ([mode] if mode else []), tokens


_NUMERIC = re.compile(r"^-(\d|\.\d|inf|nan)")
_VALUE_FLAGS = {"--f", "--f-grid", "--alpha", "--alpha-grid", "--delta", "--delta-grid"}


def _glue_negative(argv: list) -> list:
    """Let grid flags take values that start with a minus sign (``--delta -1:1:41``)."""
    out, i = [], 0
    while i < len(argv):
        tok = argv[i]
        if tok in _VALUE_FLAGS and i + 1 < len(argv) and _NUMERIC.match(argv[i + 1]):
            out.append(f"{tok}={argv[i + 1]}")
            i += 2
            continue
        out.append(tok)
        i += 1
    return out


def _merge_config(argv: list) -> list:
    pre = argparse.ArgumentParser(add_help=False)
    pre.add_argument("--config")
    known, _ = pre.parse_known_args(argv)
    if not known.config:
        return argv
    mode_tok, tokens = read_config(known.config)
    if argv and argv[0] in MODES:
        return [argv[0]] + tokens + argv[1:]
    if not mode_tok:
        raise ConfigError("no mode given on the command line or in the config file")
    return mode_tok + tokens + argv


def config_from_args(args: argparse.Namespace) -> RunConfig:
    if args.order < 1:
        raise ConfigError("--order must be >= 1")
    if args.tol is not None and not args.tol > 0:
        raise ConfigError("--tol must be > 0")
    if args.n_max_start < 1:
        raise ConfigError("--n-max-start must be >= 1")
    if not args.omega_c > 0:
        raise ConfigError("--omega-c must be > 0")
    levels = getattr(args, "level", None) or args.levels
    try:
        levels = tuple(parse_level(s) for s in levels.split(",")) if levels else None
    except PdmCavityError as exc:
        raise ConfigError(str(exc)) from None
    quantities = tuple(q.strip() for q in getattr(args, "quantities", "energy").split(","))
    bad = [q for q in quantities if q not in QUANTITIES]
    if bad:
        raise ConfigError(f"unknown quantities {bad}; choose from {','.join(QUANTITIES)}")
    k_max = getattr(args, "k_max", 5)
    if k_max < 0:
        raise ConfigError("--k-max must be >= 0")
    engines = ("dsp", "exact") if args.engine == "both" else (args.engine,)
    return RunConfig(
        mode=args.mode, f=parse_grid(args.f), alpha=parse_grid(args.alpha),
        delta=parse_grid(args.delta), omega_c=args.omega_c, molecule=args.molecule,
        transition=args.transition, catalog=args.catalog, engines=engines,
        order=args.order, levels=levels, quantities=quantities, k_max=k_max,
        tol=args.tol, n_max_start=args.n_max_start, output=args.output,
        timestamp=not args.no_timestamp)


def _fmt(x) -> str:
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (float, np.floating)):
        return repr(float(x))
    return str(x)


def _header(cfg: RunConfig, extra: Sequence[str] = ()) -> list:
    lines = [
        f"pdmcavity {__version__} mode={cfg.mode}",
        f"python {platform.python_version()} numpy {np.__version__}",
        "f=" + ",".join(map(repr, cfg.f)),
    ]
    if cfg.mode != "table1":
        lines += ["alpha=" + ",".join(map(repr, cfg.alpha)),
                  "delta=" + ",".join(map(repr, cfg.delta)),
                  f"omega_c={cfg.omega_c!r}"]
    if cfg.mode not in ("table1", "validate"):
        lines.append(f"order={cfg.order} engines={','.join(cfg.engines)}")
    else:
        lines.append("engine=dsp (closed forms)")
    if cfg.molecule:
        lines.append(f"molecule={cfg.molecule} transition={cfg.transition or ''} "
                     "units=cm^-1 (delta is omega_0 - omega_c in cm^-1)")
    if cfg.levels:
        lines.append("levels=" + ",".join(map(str, cfg.levels)))
    if "exact" in cfg.engines and cfg.mode not in ("table1", "validate"):
        tol = "1e-10*omega_c" if cfg.tol is None else repr(cfg.tol)
        lines.append(f"exact: numpy.linalg.eigh, photon cutoff doubled from "
                     f"n_max={cfg.n_max_start} until the lowest levels move < {tol}; "
                     "labels by maximum overlap with dressed states")
    lines.extend(extra)
    if cfg.timestamp:
        lines.append("generated " + datetime.datetime.now(datetime.timezone.utc)
                     .isoformat(timespec="seconds"))
    return ["# " + ln for ln in lines]


def _records(cfg: RunConfig):
    return read_catalog(cfg.catalog) if cfg.catalog else default_catalog()


def _param_factory(cfg: RunConfig):
    if cfg.molecule is None:
        def make(f, alpha, delta):
            return SystemParams.from_f(f, alpha=alpha, delta=delta * cfg.omega_c,
                                       omega_c=cfg.omega_c)
        return make, cfg.alpha
    rec = find(_records(cfg), cfg.molecule, cfg.transition)

    def make(f, alpha, delta):
        return params_for(rec, f, delta)
    return make, (rec.alpha,)


def _default_levels(mode: str):
    if mode == "populations":
        return (parse_level("g0"),)
    if mode == "bs-shift":
        return tuple(lowest_labels(7)[1:])
    return tuple(lowest_labels(7))


def _grid_rows(cfg: RunConfig):
    make, alphas = _param_factory(cfg)
    quantities = {
        "spectrum": ("energy",),
        "populations": ("population",),
        "bs-shift": ("bs_shift", "bs_shift_pdm", "bs_shift_crt"),
    }.get(cfg.mode, cfg.quantities)
    options = {"n_max_start": cfg.n_max_start}
    if cfg.tol is not None:
        options["tol"] = cfg.tol
    rows = sweep(cfg.f, alphas, cfg.delta, quantities=quantities,
                 levels=cfg.levels or _default_levels(cfg.mode), engines=cfg.engines,
                 order=cfg.order, make_params=make, spectrum_options=options)
    return SWEEP_COLUMNS, [tuple(r) for r in rows], [r.error for r in rows], \
        [f"f={r.f!r} alpha={r.alpha!r} delta={r.delta!r} level={r.level}" for r in rows]


def _validate_rows(cfg: RunConfig):
    make, alphas = _param_factory(cfg)
    cols = ("f", "alpha", "delta", "alpha_bound", "alpha_ok", "coupling_ok", "max_ratio",
            "worst_pair", "k_max", "error")
    rows, errors, where = [], [], []
    for f in cfg.f:
        for a in alphas:
            for d in cfg.delta:
                try:
                    rep = validity_metrics(make(f, a, d), cfg.k_max)
                    rows.append((f, a, d, rep.alpha_bound, rep.alpha_ok, rep.coupling_ok,
                                 rep.max_ratio, "|".join(map(str, rep.worst_pair)),
                                 cfg.k_max, ""))
                    errors.append("")
                except (PdmCavityError, ZeroDivisionError) as exc:
                    code = getattr(exc, "code", "invalid-params")
                    rows.append((f, a, d, math.nan, False, False, math.nan, "", cfg.k_max,
                                 code))
                    errors.append(code)
                where.append(f"f={f!r} alpha={a!r} delta={d!r}")
    return cols, rows, errors, where


def _table1_rows(cfg: RunConfig):
    if len(cfg.f) != 1:
        raise ConfigError("table1 takes a single --f value")
    rows = table1(_records(cfg), f=cfg.f[0])
    cols = ("molecule", "transition", "mu_gg", "mu_ee", "mu_ge", "alpha", "omega0_cm", "f",
            "pdm_shift_cm", "crt_shift_cm", "total_shift_cm", "error")
    return cols, [tuple(r) for r in rows], [r.error for r in rows], \
        [f"molecule={r.molecule}:{r.transition}" for r in rows]


def render(cfg: RunConfig, columns, rows, extra_header: Sequence[str] = ()) -> str:
    buf = io.StringIO()
    for line in _header(cfg, extra_header):
        buf.write(line + "\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for row in rows:
        w.writerow([_fmt(x) for x in row])
    return buf.getvalue()


def run(cfg: RunConfig, stdout=None, stderr=None) -> int:
    """Execute one configured run and return the exit status."""
    stdout = sys.stdout if stdout is None else stdout
    stderr = sys.stderr if stderr is None else stderr
    try:
        if cfg.mode == "table1":
            cols, rows, errors, where = _table1_rows(cfg)
        elif cfg.mode == "validate":
            cols, rows, errors, where = _validate_rows(cfg)
        else:
            cols, rows, errors, where = _grid_rows(cfg)
    except (ConfigError, PdmCavityError, OSError) as exc:
        code = getattr(exc, "code", "invalid-config")
        stderr.write(f"error: code={code} message={exc}\n")
        return EXIT_CONFIG
    counts = Counter(e for e in errors if e)
    summary = [f"errors: {code}={n}" for code, n in sorted(counts.items())]
    text = render(cfg, cols, rows, summary)
    if cfg.output:
        Path(cfg.output).write_text(text, encoding="utf-8")
    else:
        stdout.write(text)
    status = EXIT_OK
    for code in sorted(counts):
        if code in COMPUTE_CODES:
            first = where[errors.index(code)]
            stderr.write(f"error: code={code} count={counts[code]} first={first}\n")
            status = EXIT_COMPUTE
    return status


def main(argv: Optional[Sequence[str]] = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    try:
        args = build_parser().parse_args(_merge_config(_glue_negative(argv)))
        cfg = config_from_args(args)
    except ConfigError as exc:
        sys.stderr.write(f"error: code=invalid-config message={exc}\n")
        return EXIT_CONFIG
    return run(cfg)


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
