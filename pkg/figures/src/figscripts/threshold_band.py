"""Oscillation-onset threshold vs dipole moment with a standard-deviation
band.

Input schema (fig5_threshold.csv): dipole_debye,threshold_mean_us,
threshold_std_us
"""

import math

import matplotlib.pyplot as plt
import numpy as np

from .common import SchemaError, make_parser, read_csv, save

COLUMNS = ("dipole_debye", "threshold_mean_us", "threshold_std_us")


def render(input_path, output_path, dpi=150) -> None:
    data = read_csv(input_path, COLUMNS)
    rows = [
        (d, m, s if isinstance(s, float) and not math.isnan(s) else 0.0)
        for d, m, s in zip(
            data["dipole_debye"], data["threshold_mean_us"], data["threshold_std_us"]
        )
        if isinstance(m, float) and not math.isnan(m)
    ]
    if not rows:
        raise SchemaError(f"{input_path}: no thresholds to plot")
    rows.sort()
    d, mean, std = map(np.asarray, zip(*rows))
    fig, ax = plt.subplots(figsize=(5.5, 4))
    ax.plot(d, mean, "ko-", ms=5)
    lower = np.maximum(mean - std, np.min(mean[mean > 0]) * 1e-2 if np.any(mean > 0) else 1e-6)
    ax.fill_between(d, lower, mean + std, color="grey", alpha=0.35)
    ax.set_yscale("log")
    ax.set_xlabel("dipole moment (Debye)")
    ax.set_ylabel("oscillation-onset T1_min (us)")
    ax.set_title("Onset threshold vs dipole moment")
    save(fig, output_path, dpi)


def main(argv=None) -> int:
    args = make_parser(__doc__).parse_args(argv)
    render(args.input, args.output, args.dpi)
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
