"""Reflection spectra for the controller-level and drive-coupling families.

Writes one long-format CSV per family plus a table of resonance positions and
linewidths, ready for plotting |1 - s|^2 against energy.

    python3 scripts/reflection_families.py --outdir results/
"""

import argparse
from pathlib import Path

from resonator_feshbach import figure_system
from resonator_feshbach.cli import sweep_csv, tracks_csv
from resonator_feshbach.model import Band
from resonator_feshbach.sweep import EnergyGrid, SweepPlan, run_sweep, track_resonance

FAMILIES = {
    "controller_level": (2.2, 2.4, 2.6, 2.8, 3.0),
    "arm_a.coupling": (0.2, 0.4, 0.6, 0.8, 1.0),
}


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--outdir", type=Path, default=Path("results"))
    ap.add_argument("--points", type=int, default=801)
    ap.add_argument("--workers", type=int, default=None)
    args = ap.parse_args()
    args.outdir.mkdir(parents=True, exist_ok=True)

    base = figure_system(2.5, 0.5)
    grid = EnergyGrid(0.0, 4.0, args.points)
    for vary, values in FAMILIES.items():
        stem = vary.replace(".", "_")
        records = run_sweep(SweepPlan(base, vary, values, grid), workers=args.workers)
        (args.outdir / f"{stem}_spectra.csv").write_text(sweep_csv(records))
        tracks = track_resonance(base, vary, values, Band(2.0, 4.0))
        (args.outdir / f"{stem}_tracks.csv").write_text(tracks_csv(tracks))
        for t in tracks:
            print(f"{vary}={t.value:<4g} resonance={t.resonance_energy:.6f} fwhm={t.fwhm:.4f}")


if __name__ == "__main__":
    main()
