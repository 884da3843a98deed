"""Command-line front end.

Exit codes: 0 success, 1 configuration error, 2 I/O error, 3 failed verification.
"""

from __future__ import annotations

import argparse
import io
import json
import math
import sys as _sys
from typing import Iterable

import numpy as np

from . import __version__
from .analytic import bound_state_energies, find_resonances
from .config import ConfigError, RunConfig
from .model import Band, band_edges
from .sweep import EnergyGrid, SpectrumRecord, SweepPlan, run_sweep, spectrum, track_resonance
from .verify import lattice_levels, run_verification

EXIT_OK, EXIT_CONFIG, EXIT_IO, EXIT_VERIFY = 0, 1, 2, 3

SPECTRUM_COLUMNS = ("E", "s_re", "s_im", "r_re", "r_im", "reflect_sq", "flags")
SWEEP_COLUMNS = ("param", "E", "s_re", "s_im", "reflect_sq", "flags")


def fmt(x: float | None) -> str:
    """Shortest round-trip decimal; empty for missing values."""
    if x is None or (isinstance(x, float) and math.isnan(x)):
        return ""
    return repr(float(x))


def _flags(record: SpectrumRecord) -> str:
    return "|".join(sorted(record.flags))


def spectrum_csv(records: Iterable[SpectrumRecord]) -> str:
    out = io.StringIO()
    out.write(",".join(SPECTRUM_COLUMNS) + "\n")
    for rec in records:
        s, r = rec.s, rec.reflection
        row = [
            fmt(rec.energy),
            fmt(None if s is None else s.real),
            fmt(None if s is None else s.imag),
            fmt(None if r is None else r.real),
            fmt(None if r is None else r.imag),
            fmt(rec.reflect_sq),
            _flags(rec),
        ]
        out.write(",".join(row) + "\n")
    return out.getvalue()


def sweep_csv(records: Iterable[SpectrumRecord]) -> str:
    out = io.StringIO()
    out.write(",".join(SWEEP_COLUMNS) + "\n")
    for rec in records:
        s = rec.s
        row = [
            fmt(rec.parameter_value),
            fmt(rec.energy),
            fmt(None if s is None else s.real),
            fmt(None if s is None else s.imag),
            fmt(rec.reflect_sq),
            _flags(rec),
        ]
        out.write(",".join(row) + "\n")
    return out.getvalue()


def to_json(doc) -> str:
    return json.dumps(doc, sort_keys=True, indent=2, allow_nan=False) + "\n"


def _emit(text: str, path: str | None) -> None:
    if path is None:
        _sys.stdout.write(text)
        return
    with open(path, "w", newline="\n", encoding="utf-8") as fh:
        fh.write(text)


def _require(block, name: str):
    if block is None:
        raise ConfigError(f"config.{name}: missing required key for this command")
    return block


def cmd_spectrum(cfg: RunConfig, out: str | None, threads: int | None) -> int:
    grid = _require(cfg.spectrum, "spectrum")
    records = spectrum(
        cfg.system,
        EnergyGrid(grid.e_min, grid.e_max, grid.count).points(),
        refine=grid.refine,
        branch=cfg.oracle.branch,
    )
    _emit(spectrum_csv(records), out)
    return EXIT_OK


def bound_document(cfg: RunConfig) -> dict:
    sys = cfg.system
    entries = []
    bare_seen = False
    for label in ("A", "B"):
        arm = sys.arm(label)
        for bs in bound_state_energies(arm, sys.controller_level, label):
            if arm.coupling == 0.0:
                # the bare controller level belongs to neither arm; list it once
                if bare_seen:
                    continue
                bare_seen = True
                entry = {"arm": None, "branch": None, "energy": bs.energy, "kappa_I": None, "residual": 0.0}
            else:
                entry = {
                    "arm": label,
                    "branch": bs.branch,
                    "energy": bs.energy,
                    "kappa_I": bs.decay_rate,
                    "residual": bs.residual,
                }
            if cfg.bound.verify:
                levels = lattice_levels(sys, label, cfg.bound.N)
                if levels:
                    lat = min(levels, key=lambda s: abs(s.energy - bs.energy))
                    entry["lattice_energy"] = lat.energy
                    entry["delta"] = abs(lat.energy - bs.energy)
                else:
                    entry["lattice_energy"] = None
                    entry["delta"] = None
            entries.append(entry)
    entries.sort(key=lambda e: (e["energy"], e["arm"] or ""))
    doc = {"schema_version": cfg.schema_version, "controller_level": sys.controller_level, "bound_states": entries}
    if cfg.bound.verify:
        doc["lattice_half_length"] = cfg.bound.N
    return doc


def cmd_bound(cfg: RunConfig, out: str | None, threads: int | None) -> int:
    _emit(to_json(bound_document(cfg)), out)
    return EXIT_OK


def cmd_resonances(cfg: RunConfig, out: str | None, threads: int | None) -> int:
    band_a = band_edges(cfg.system.arm_a)
    window = Band(*cfg.window) if cfg.window else band_a
    roots = find_resonances(cfg.system, window, cfg.oracle.branch)
    doc = {"window": [window.lower, window.upper], "resonances": roots}
    _emit(to_json(doc), out)
    return EXIT_OK


def tracks_csv(tracks) -> str:
    out = io.StringIO()
    out.write("param,resonance,fwhm\n")
    for t in tracks:
        out.write(f"{fmt(t.value)},{fmt(t.resonance_energy)},{fmt(t.fwhm)}\n")
    return out.getvalue()


def cmd_sweep(cfg: RunConfig, out: str | None, threads: int | None) -> int:
    block = _require(cfg.sweep, "sweep")
    g = block.energy_grid
    plan = SweepPlan(cfg.system, block.vary, block.values, EnergyGrid(g.e_min, g.e_max, g.count), g.refine)
    _emit(sweep_csv(run_sweep(plan, workers=threads)), out)
    if cfg.output.tracks_path:
        tracks = track_resonance(cfg.system, block.vary, block.values)
        _emit(tracks_csv(tracks), cfg.output.tracks_path)
    return EXIT_OK


def cmd_verify(cfg: RunConfig, out: str | None, threads: int | None) -> int:
    report = run_verification(cfg.system, cfg.oracle, workers=threads)
    _emit(to_json(_clean(report)), out)
    for name in report["failed"]:
        print(f"FAILED: {name}", file=_sys.stderr)
    return EXIT_OK if report["passed"] else EXIT_VERIFY


def _clean(obj):
    if isinstance(obj, dict):
        return {k: _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (np.floating, float)):
        return float(obj) if math.isfinite(obj) else None
    if isinstance(obj, np.integer):
        return int(obj)
    return obj


COMMANDS = {
    "spectrum": cmd_spectrum,
    "bound": cmd_bound,
    "resonances": cmd_resonances,
    "sweep": cmd_sweep,
    "verify": cmd_verify,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="resonator-feshbach",
        description="Single-photon transport through two resonator arrays joined by a controller.",
    )
    parser.add_argument("--version", action="version", version=__version__)
    parser.add_argument("command", choices=sorted(COMMANDS))
    parser.add_argument("--config", required=True, help="JSON run configuration")
    parser.add_argument("--out", help="output file (defaults to output.path, then stdout)")
    parser.add_argument("--threads", type=int, default=None, help="worker cap (default: all cores)")
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    if args.threads is not None and args.threads < 1:
        print("error: --threads must be >= 1", file=_sys.stderr)
        return EXIT_CONFIG
    try:
        cfg = RunConfig.load(args.config)
    except ConfigError as exc:
        print(f"config error: {exc}", file=_sys.stderr)
        return EXIT_CONFIG
    out = args.out or cfg.output.path
    try:
        return COMMANDS[args.command](cfg, out, args.threads)
    except ConfigError as exc:
        print(f"config error: {exc}", file=_sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"I/O error: {exc}", file=_sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    raise SystemExit(main())
