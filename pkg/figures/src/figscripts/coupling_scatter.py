"""Tunneling fraction vs dipole coupling of the strongest defect, colored
by the trial's T1, with equal-coupling-strength guide lines.

Input schema: fig4_stats.csv (same as distance-stats).
"""

import math

import matplotlib.pyplot as plt
import numpy as np
from matplotlib.colors import LogNorm

from .common import SchemaError, make_parser, read_csv, save
from .distance_stats import COLUMNS


def render(input_path, output_path, dpi=150) -> None:
    data = read_csv(input_path, COLUMNS)
    rows = [
        (pe, d0, t1)
        for pe, d0, t1 in zip(data["pe_hz"], data["delta0_norm"], data["t1_us"])
        if isinstance(t1, float) and not math.isnan(t1) and pe > 0 and d0 > 0
    ]
    if not rows:
        raise SchemaError(f"{input_path}: no fitted trials to plot")
    pe, d0, t1 = map(np.asarray, zip(*rows))
    fig, ax = plt.subplots(figsize=(5.5, 4.2))
    sc = ax.scatter(pe, d0, c=t1, s=26, cmap="viridis", norm=LogNorm())
    fig.colorbar(sc, ax=ax, label="T1 (us)")
    # equal coupling strength: pe * delta0 = const
    pe_line = np.logspace(np.log10(pe.min()), np.log10(pe.max()), 50)
    for coupling in (2e3, 2e4):
        ax.plot(pe_line, coupling / pe_line, "--", color="grey", lw=0.8)
    ax.set_xscale("log")
    ax.set_yscale("log")
    ax.set_ylim(max(d0.min() / 3, 1e-6), 1.2)
    ax.set_xlabel("|p.E|/h of strongest defect (Hz)")
    ax.set_ylabel("tunneling fraction Delta0/E")
    ax.set_title("Strongest-defect coupling anatomy")
    save(fig, output_path, dpi)


def main(argv=None) -> int:
    args = make_parser(__doc__).parse_args(argv)
    render(args.input, args.output, args.dpi)
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
