"""Render CSV outputs of ``mpemba fig2/fig3/fig4`` with matplotlib.

    python3 scripts/plot_figures.py [--out out]

Needs matplotlib (``pip install matplotlib``); the package itself does not.
"""

import argparse
import csv
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402


def load(path: Path) -> dict:
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    cols = np.array([[float(x) if x else np.nan for x in row] for row in rows[1:]])
    return {name: cols[:, k] for k, name in enumerate(rows[0])}


def plot_trajectories(d: Path, metric: str, ax) -> None:
    for f in sorted(d.glob("s[0-9][0-9][0-9].csv")):
        data = load(f)
        ax.plot(data["t"], data[metric], lw=1)
    ax.set_yscale("log")
    ax.set_xlabel("t / T1")
    ax.set_ylabel(metric)
    ax.set_title(d.name)


def plot_map(d: Path, ax) -> None:
    data = load(d / "map.csv")
    r, th = np.unique(data["r0"]), np.unique(data["theta0"])
    tau = data["tau_th"].reshape(len(r), len(th))
    mesh = ax.pcolormesh(r, th / np.pi, tau.T, shading="auto")
    plt.colorbar(mesh, ax=ax, label="tau_TH / T1")
    ax.set_xlabel("r0")
    ax.set_ylabel("theta0 / pi")
    ax.set_title(d.name)


def plot_field(d: Path, ax) -> None:
    data = load(d / "field.csv")
    x, z = data["r"] * np.sin(data["theta"]), data["r"] * np.cos(data["theta"])
    speed = np.where(data["speed"] > 0, data["speed"], 1.0)
    ax.quiver(x, z, data["vx"] / speed, data["vz"] / speed, np.log10(data["speed"] + 1e-300), scale=40)
    ax.set_aspect("equal")
    ax.set_xlabel("m_x")
    ax.set_ylabel("m_z")
    ax.set_title(d.name)


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out", default="out")
    args = ap.parse_args()
    out = Path(args.out)
    for d in sorted(p for p in out.iterdir() if p.is_dir()):
        if (d / "index.csv").exists():
            fig, axes = plt.subplots(1, 2, figsize=(10, 4))
            plot_trajectories(d, "D", axes[0])
            plot_trajectories(d, "S", axes[1])
        elif (d / "map.csv").exists():
            fig, ax = plt.subplots(figsize=(5, 4))
            plot_map(d, ax)
        elif (d / "field.csv").exists():
            fig, ax = plt.subplots(figsize=(5, 5))
            plot_field(d, ax)
        else:
            continue
        fig.tight_layout()
        fig.savefig(out / f"{d.name}.png", dpi=120)
        plt.close(fig)
        print(f"wrote {out / (d.name + '.png')}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
