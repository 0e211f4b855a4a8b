"""Run the fig2/fig3/fig4 presets and print a short summary of each.

    python3 scripts/reproduce_figures.py [--out out] [--grid 64x64]
"""

import argparse
import json
import math
from pathlib import Path

import numpy as np

from mpemba.cli import main as cli_main


def summarize(out: Path) -> None:
    for path in sorted(out.glob("*/crossings.json")):
        data = json.loads(path.read_text())
        counts = {m: len(v) for m, v in data["crossings"].items()}
        print(f"{path.parent.name:22s} crossings {counts}  earliest {data['earliest']}  1/|lambda| {data['mpe_timescale']:.5g}")
    for path in sorted(out.glob("*/map.csv")):
        tau = np.genfromtxt(path, delimiter=",", skip_header=1, usecols=2, filling_values=math.nan)
        print(f"{path.parent.name:22s} tau_th range [{np.nanmin(tau):.4g}, {np.nanmax(tau):.4g}], unreached {np.isnan(tau).sum()}")


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out", default="out")
    ap.add_argument("--grid", default="64x64")
    args = ap.parse_args()
    for fig in ("fig2", "fig3", "fig4"):
        extra = [] if fig == "fig2" else ["--grid", args.grid]
        status = cli_main([fig, "--out", args.out, *extra])
        if status:
            return status
    summarize(Path(args.out))
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
