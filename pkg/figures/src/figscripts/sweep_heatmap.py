"""Dipole x t1_min sweep heatmap: log-scale t1_min axis, color = log T1.

Input schema (fig5_sweep.csv): dipole_debye,t1min_us,t1_us,oscillatory
"""

import math

import matplotlib.pyplot as plt
import numpy as np
from matplotlib.colors import LogNorm

from .common import SchemaError, make_parser, read_csv, save

COLUMNS = ("dipole_debye", "t1min_us", "t1_us", "oscillatory")


def render(input_path, output_path, dpi=150) -> None:
    data = read_csv(input_path, COLUMNS)
    dipoles = np.unique(np.asarray(data["dipole_debye"], float))
    t1mins = np.unique(np.asarray(data["t1min_us"], float))
    grid = np.full((len(t1mins), len(dipoles)), np.nan)
    col = {d: j for j, d in enumerate(dipoles)}
    row = {t: i for i, t in enumerate(t1mins)}
    for d, tm, t1, _ in zip(
        data["dipole_debye"], data["t1min_us"], data["t1_us"], data["oscillatory"]
    ):
        if isinstance(t1, float) and not math.isnan(t1):
            grid[row[tm], col[d]] = t1
    if np.all(np.isnan(grid)):
        raise SchemaError(f"{input_path}: no fitted cells to plot")
    fig, ax = plt.subplots(figsize=(5.5, 4.2))
    masked = np.ma.masked_invalid(grid)
    mesh = ax.pcolormesh(dipoles, t1mins, masked, cmap="magma", norm=LogNorm())
    fig.colorbar(mesh, ax=ax, label="T1 (us), log scale")
    ax.set_yscale("log")
    ax.set_xlabel("dipole moment (Debye)")
    ax.set_ylabel("TLS T1_min (us)")
    ax.set_title("Qubit T1 over dipole and TLS lifetime floor")
    save(fig, output_path, dpi)


def main(argv=None) -> int:
    args = make_parser(__doc__).parse_args(argv)
    render(args.input, args.output, args.dpi)
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
