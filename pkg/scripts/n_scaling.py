"""Earliest crossing time on the fig2 line of initial states versus ensemble size.

    python3 scripts/n_scaling.py [--horizon 2.0] [N ...]
"""

import argparse

from mpemba.analysis import earliest_crossing, metric_series, mpe_timescale, trajectories_for
from mpemba.config import preset_fig2


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("sizes", nargs="*", type=int, default=[1, 10, 30, 100, 300, 1000, 3000])
    ap.add_argument("--horizon", type=float, default=2.0)
    args = ap.parse_args()
    print(f"{'n':>6} {'1/|lambda_theta|':>16} {'earliest D':>12} {'earliest S':>12}")
    for n in args.sizes:
        cfg = preset_fig2(n=n, t_end=args.horizon)[0]
        trajs = trajectories_for(cfg.initial_states(), cfg.params, cfg.integrator)
        row = [earliest_crossing([metric_series(tr, m, str(i)) for i, tr in enumerate(trajs)]) for m in ("D", "S")]
        cells = ["-" if t is None else f"{t:.5f}" for t in row]
        print(f"{n:>6} {mpe_timescale(cfg.params):>16.5f} {cells[0]:>12} {cells[1]:>12}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
