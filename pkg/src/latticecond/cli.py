"""Command line front end: ``latticecond <mode> --config FILE [--threads N] [--output DIR]``.

The config is a flat ``key = value`` file; ``#`` starts a comment.  Every
key is listed in ``latticecond --help``.  Outputs are CSV files with floats
written at 17 significant digits, plus a ``manifest.txt`` describing the run.
"""

from __future__ import annotations

import argparse
import os
import platform
import sys
import tempfile
import time
import warnings
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import scipy

from . import __version__
from .bands import compute_bands, resolve_threads
from .conductivity import AmbiguousUnitError, NoPlateauError, estimate_sigma0, quantize, sweep
from .model import InvalidParameterError, ModelParams, validate
from .scattering import theta_sweep
from .verification import run_verification

__all__ = ["ConfigError", "RunConfig", "main", "parse_config", "run"]

MODES = ("bands", "sweep", "scatter", "verify")
_DERIVED = ("L", "a", "D", "q_max", "n_max")


class ConfigError(ValueError):
    """Invalid config text; ``line`` and ``key`` locate the problem when known."""

    def __init__(self, message, line=None, key=None):
        where = f"line {line}: " if line is not None else ""
        super().__init__(where + message)
        self.line = line
        self.key = key


def _floats(text):
    return [float(x) for x in text.replace(",", " ").split()]


def _bool(text):
    low = text.lower()
    if low in ("1", "true", "yes", "on"):
        return True
    if low in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


def _threads(text):
    return "auto" if text == "auto" else int(text)


def _efield_range(text):
    vals = text.replace(",", " ").split()
    if len(vals) != 3:
        raise ValueError("expected 'min, max, count'")
    return float(vals[0]), float(vals[1]), int(vals[2])


# key: (parser, default, help); a default of ... marks a required key
_MODEL_KEYS = {
    "m": (float, 1.0, "mass"),
    "e": (float, 1.0, "charge"),
    "lambda": (float, ..., "spin-orbit strength (required)"),
    "Ux": (float, 1000.0, "lattice potential along x"),
    "Uy": (float, 1000.0, "lattice potential along y"),
    "Efield": (float, 0.0, "electric field (bands and verify modes)"),
    "N": (int, ..., "cells per side, even (required)"),
    "Q": (int, ..., "position states, odd (required)"),
    "J": (int, ..., "momentum states, odd (required)"),
    "spin": (int, 1, "spin sector, +1 or -1"),
}
_RUN_KEYS = {
    "mode": (str, None, "bands, sweep, scatter or verify; must match the command line"),
    "M": (int, 12, "number of bands"),
    "tol": (float, 1e-10, "eigensolver residual tolerance"),
    "method": (str, "dense", "eigensolver: dense or lanczos"),
    "drop_duplicate_edge": (_bool, False, "leave out the k = -pi/a grid point"),
    "threads": (_threads, 1, "worker threads or 'auto'"),
    "output_dir": (str, ".", "directory for output files"),
    "efield_range": (_efield_range, None, "sweep: 'min, max, count', uniform grid"),
    "fermi_levels": (_floats, None, "sweep: comma separated Fermi levels"),
    "level": (str, "quick", "verify: quick or full"),
    "U": (float, None, "scatter: obstacle strength"),
    "kwave": (float, None, "scatter: incident wavenumber"),
    "theta_count": (int, 101, "scatter: number of angles in [0, pi]"),
}
KEYS = {**_MODEL_KEYS, **_RUN_KEYS}
_MODE_REQUIRED = {
    "bands": (),
    "sweep": ("efield_range", "fermi_levels"),
    "scatter": ("U", "kwave"),
    "verify": (),
}


@dataclass
class RunConfig:
    mode: str
    params: ModelParams | None
    M: int = 12
    tol: float = 1e-10
    method: str = "dense"
    drop_duplicate_edge: bool = False
    threads: int | str = 1
    output_dir: Path = Path(".")
    efield_range: tuple | None = None
    fermi_levels: list = field(default_factory=list)
    level: str = "quick"
    U: float | None = None
    kwave: float | None = None
    theta_count: int = 101
    m: float = 1.0
    source: dict = field(default_factory=dict)

    def efields(self) -> np.ndarray:
        lo, hi, count = self.efield_range
        return np.linspace(lo, hi, count)


def _read_pairs(text):
    pairs = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"expected 'key = value', got {raw.strip()!r}", line=lineno)
        key, value = (s.strip() for s in line.split("=", 1))
        if not key:
            raise ConfigError("missing key before '='", line=lineno)
        if key in _DERIVED:
            raise ConfigError(f"{key} is derived from Q, lambda and N and cannot be set", line=lineno, key=key)
        if key not in KEYS:
            raise ConfigError(f"unknown key {key!r}", line=lineno, key=key)
        if key in pairs:
            raise ConfigError(f"duplicate key {key!r} (first set on line {pairs[key][0]})", line=lineno, key=key)
        if not value:
            raise ConfigError(f"empty value for {key!r}", line=lineno, key=key)
        try:
            pairs[key] = (lineno, KEYS[key][0](value))
        except ValueError as exc:
            raise ConfigError(f"bad value for {key!r}: {exc}", line=lineno, key=key) from None
    return pairs


def parse_config(text: str, mode: str | None = None) -> RunConfig:
    """Parse and validate a config document.

    ``mode`` (from the command line) takes part in validation; it must agree
    with a ``mode`` key when both are given.
    """
    pairs = _read_pairs(text)
    values = {k: v for k, (_, v) in pairs.items()}
    cfg_mode = values.pop("mode", None)
    if mode is not None and cfg_mode is not None and mode != cfg_mode:
        raise ConfigError(f"mode {cfg_mode!r} in config disagrees with {mode!r}", line=pairs["mode"][0], key="mode")
    mode = mode or cfg_mode
    if mode not in MODES:
        raise ConfigError(f"mode must be one of {', '.join(MODES)}, got {mode!r}", key="mode")

    for key in _MODE_REQUIRED[mode]:
        if key not in values:
            raise ConfigError(f"{key} is required in {mode} mode", key=key)

    params = None
    if mode != "scatter":
        for key, (_, default, _) in _MODEL_KEYS.items():
            if default is ... and key not in values:
                raise ConfigError(f"{key} is required", key=key)
        kw = {k: values.get(k, d) for k, (_, d, _) in _MODEL_KEYS.items()}
        kw["lam"] = kw.pop("lambda")
        params = ModelParams(**kw)
        report = validate(params)
        if not report.ok:
            raise ConfigError("; ".join(report.violations), key=_first_named(report.violations))

    run_kw = {k: values[k] for k in _RUN_KEYS if k in values and k != "mode"}
    cfg = RunConfig(mode=mode, params=params, source=values, **run_kw)
    if "m" in values:
        cfg.m = values["m"]
    cfg.output_dir = Path(cfg.output_dir)
    _check_run(cfg, pairs)
    return cfg


def _first_named(violations):
    for v in violations:
        return v.split()[0]
    return None


def _check_run(cfg: RunConfig, pairs):
    def fail(key, msg):
        line = pairs[key][0] if key in pairs else None
        raise ConfigError(msg, line=line, key=key)

    if cfg.M < 1:
        fail("M", "M must be >= 1")
    if not cfg.tol > 0:
        fail("tol", "tol must be positive")
    if cfg.method not in ("dense", "lanczos"):
        fail("method", "method must be dense or lanczos")
    if cfg.level not in ("quick", "full"):
        fail("level", "level must be quick or full")
    if cfg.threads != "auto" and cfg.threads < 1:
        fail("threads", "threads must be >= 1 or 'auto'")
    if cfg.mode == "sweep":
        lo, hi, count = cfg.efield_range
        if count < 1:
            fail("efield_range", "efield count must be >= 1")
        if count > 1 and not hi > lo:
            fail("efield_range", "efield max must exceed min")
        if not cfg.fermi_levels:
            fail("fermi_levels", "at least one Fermi level is required")
    if cfg.mode == "scatter":
        if not cfg.kwave > 0:
            fail("kwave", "kwave must be positive")
        if not cfg.m > 0:
            fail("m", "m must be positive")
        if cfg.theta_count < 2:
            fail("theta_count", "theta_count must be >= 2")


# -- output -----------------------------------------------------------------


def _fmt(x) -> str:
    if isinstance(x, str):
        return x
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    # adding 0.0 turns -0.0 into 0.0
    return format(float(x) + 0.0, ".17g")


class _Outputs:
    """Atomic file writer that can remove everything it wrote."""

    def __init__(self, directory: Path):
        self.directory = directory
        self.written: list[Path] = []

    def write(self, name: str, text: str) -> Path:
        self.directory.mkdir(parents=True, exist_ok=True)
        target = self.directory / name
        fd, tmp = tempfile.mkstemp(prefix=f".{name}.", dir=self.directory)
        try:
            with os.fdopen(fd, "w", newline="") as fh:
                fh.write(text)
            os.replace(tmp, target)
        except BaseException:
            Path(tmp).unlink(missing_ok=True)
            raise
        self.written.append(target)
        return target

    def csv(self, name: str, header, rows) -> Path:
        lines = [",".join(header)]
        lines.extend(",".join(_fmt(v) for v in row) for row in rows)
        return self.write(name, "\n".join(lines) + "\n")

    def discard(self):
        for path in self.written:
            path.unlink(missing_ok=True)
        self.written.clear()


def _run_bands(cfg: RunConfig, out: _Outputs, notes: list):
    b = compute_bands(cfg.params, cfg.M, cfg.threads, cfg.tol, cfg.method, cfg.drop_duplicate_edge)
    rows = []
    for band in range(b.M):
        for i, (l, k) in enumerate(zip(b.lvalues, b.kvalues)):
            rows.append((band, int(l), k, b.energies[band, i], b.px_mean[band, i]))
    out.csv("bands.csv", ["band", "l", "k", "energy", "px_mean"], rows)
    summary = [(band, b.band_mean_energy[band], b.band_momentum_sum[band]) for band in range(b.M)]
    out.csv("band_summary.csv", ["band", "mean_energy", "Pi"], summary)
    spread = np.ptp(b.energies, axis=1)
    notes.append(f"largest in-band energy spread: {spread.max():.6g}")
    return 0


def _run_sweep(cfg: RunConfig, out: _Outputs, notes: list):
    efields = cfg.efields()
    curves = sweep(
        cfg.params, efields, cfg.fermi_levels, cfg.M, cfg.threads, cfg.tol, cfg.method, cfg.drop_duplicate_edge
    )
    sigma0 = residual = None
    try:
        fit = estimate_sigma0(curves)
        sigma0, residual = fit.sigma0_over_alpha, fit.residual
        curves = quantize(curves, sigma0)
        notes.append(f"sigma0/alpha = {sigma0:.6g}, residual = {residual:.3g}")
    except (NoPlateauError, AmbiguousUnitError) as exc:
        notes.append(f"no quantization unit: {exc}")
    for c in curves:
        rows = zip(c.efield_values, c.sigma_over_alpha, c.n_bands_included)
        out.csv(f"sweep_{_fmt(c.fermi_level)}.csv", ["efield", "sigma_over_alpha", "n_bands_included"], rows)
    summary = [
        (
            _fmt(c.fermi_level),
            "" if sigma0 is None else _fmt(sigma0),
            "" if residual is None else _fmt(residual),
            ";".join(_fmt(x) for x in c.jump_locations),
        )
        for c in curves
    ]
    out.csv("sigma0_summary.csv", ["fermi_level", "sigma0_over_alpha", "residual", "jump_locations"], summary)
    return 0


def _run_scatter(cfg: RunConfig, out: _Outputs, notes: list):
    rows = theta_sweep(cfg.U, cfg.kwave, cfg.m, cfg.theta_count)
    out.csv("scatter.csv", ["theta", "re", "im", "abs2"], rows)
    return 0


def _run_verify(cfg: RunConfig, out: _Outputs, notes: list):
    report = run_verification(cfg.params, cfg.level, M=min(cfg.M, 6))
    out.write("verify.csv", report.to_csv())
    print(report)
    notes.append(f"verification {'passed' if report.passed else 'FAILED'}")
    return 0 if report.passed else 1


_RUNNERS = {"bands": _run_bands, "sweep": _run_sweep, "scatter": _run_scatter, "verify": _run_verify}


def _manifest(cfg: RunConfig, seconds: float, notes, files, status) -> str:
    # everything that is not a comment is a valid config, so the manifest
    # can be fed back to reproduce the run
    lines = [
        f"# latticecond {__version__}",
        f"# status: {status}",
        f"# wall time: {seconds:.3f} s",
        f"# worker threads: {resolve_threads(cfg.threads)}",
        f"# python {platform.python_version()}, numpy {np.__version__}, scipy {scipy.__version__}",
        "",
        f"mode = {cfg.mode}",
        f"output_dir = {cfg.output_dir}",
    ]
    if cfg.params is not None:
        p = cfg.params
        lines += [
            f"m = {_fmt(p.m)}",
            f"e = {_fmt(p.e)}",
            f"lambda = {_fmt(p.lam)}",
            f"Ux = {_fmt(p.Ux)}",
            f"Uy = {_fmt(p.Uy)}",
            f"Efield = {_fmt(p.Efield)}",
            f"N = {p.N}",
            f"Q = {p.Q}",
            f"J = {p.J}",
            f"spin = {p.spin}",
        ]
    if cfg.mode == "scatter":
        lines.append(f"m = {_fmt(cfg.m)}")
        run_keys = ["U", "kwave", "theta_count"]
    else:
        run_keys = ["M", "tol", "method", "drop_duplicate_edge", "threads"]
        run_keys += {"sweep": ["efield_range", "fermi_levels"], "verify": ["level"], "bands": []}[cfg.mode]
    for key in run_keys:
        val = getattr(cfg, key)
        if isinstance(val, (tuple, list)):
            val = ", ".join(_fmt(v) if not isinstance(v, str) else v for v in val)
        elif isinstance(val, bool):
            val = str(val).lower()
        elif isinstance(val, float):
            val = _fmt(val)
        lines.append(f"{key} = {val}")
    if cfg.params is not None:
        p = cfg.params
        lines += [
            "",
            "# derived",
            f"# L = {_fmt(p.L)}",
            f"# a = {_fmt(p.a)}",
            f"# q_max = {p.q_max}",
            f"# D = {p.dim}",
            f"# matrix_bytes = {validate(p).matrix_bytes}",
        ]
    if notes:
        lines += ["", "# notes"] + [f"# {n}" for n in notes]
    lines += ["", "# files"] + [f"# {f.name}" for f in files]
    return "\n".join(lines) + "\n"


def run(cfg: RunConfig) -> int:
    """Execute ``cfg``; returns the process exit status.

    On any error every file written by this run is removed and the status
    is nonzero.
    """
    out = _Outputs(cfg.output_dir)
    notes: list[str] = []
    t0 = time.perf_counter()
    try:
        status = _RUNNERS[cfg.mode](cfg, out, notes)
        files = list(out.written)
        text = _manifest(cfg, time.perf_counter() - t0, notes, files, "ok" if status == 0 else "failed")
        out.write("manifest.txt", text)
    except Exception as exc:
        out.discard()
        print(f"latticecond: error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2
    print(text, end="")
    return status


def _help_epilog() -> str:
    lines = ["config keys (key = value, '#' comments):"]
    for key, (_, default, text) in KEYS.items():
        if default is ...:
            shown = "required"
        elif default is None:
            shown = "no default"
        else:
            shown = f"default {default}"
        lines.append(f"  {key:<20} {text} ({shown})")
    lines.append("  L, a, D, q_max and n_max are derived and may not be set.")
    return "\n".join(lines)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="latticecond",
        description="Band structure and transverse conductivity of a spin-orbit coupled lattice electron.",
        epilog=_help_epilog(),
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    parser.add_argument("mode", choices=MODES)
    parser.add_argument("--config", required=True, type=Path, help="key = value config file")
    parser.add_argument("--threads", help="worker threads or 'auto' (overrides the config)")
    parser.add_argument("--output", type=Path, help="output directory (overrides the config)")
    parser.add_argument("--full", action="store_true", help="verify: run the full suite instead of quick")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        text = args.config.read_text()
    except OSError as exc:
        print(f"latticecond: cannot read config: {exc}", file=sys.stderr)
        return 2
    try:
        cfg = parse_config(text, args.mode)
        if args.threads is not None:
            cfg.threads = _threads(args.threads)
            if cfg.threads != "auto" and cfg.threads < 1:
                raise ConfigError("--threads must be >= 1 or 'auto'", key="threads")
        if args.output is not None:
            cfg.output_dir = args.output
        if args.full:
            cfg.level = "full"
    except (ConfigError, InvalidParameterError, ValueError) as exc:
        print(f"latticecond: {args.config}: {exc}", file=sys.stderr)
        return 2
    with warnings.catch_warnings():
        # degeneracy notices are expected for symmetric configurations
        warnings.simplefilter("once")
        return run(cfg)


if __name__ == "__main__":
    sys.exit(main())
