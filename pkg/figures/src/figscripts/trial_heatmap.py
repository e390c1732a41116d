"""Trial-ensemble relaxation heatmap: trials stacked on the y axis, time
on x, color = qubit excited population.

Input schema (fig3_trials.csv): trial_id,t_us,p_qubit
"""

import matplotlib.pyplot as plt
import numpy as np

from .common import SchemaError, make_parser, read_csv, save

COLUMNS = ("trial_id", "t_us", "p_qubit")


def render(input_path, output_path, dpi=150) -> None:
    data = read_csv(input_path, COLUMNS)
    trials = np.asarray(data["trial_id"], float).astype(int)
    t = np.asarray(data["t_us"], float)
    p = np.asarray(data["p_qubit"], float)
    ids = np.unique(trials)
    times = np.unique(t)
    grid = np.full((len(ids), len(times)), np.nan)
    row = {tid: i for i, tid in enumerate(ids)}
    col = {tv: j for j, tv in enumerate(times)}
    for tid, tv, pv in zip(trials, t, p):
        grid[row[tid], col[tv]] = pv
    if np.all(np.isnan(grid)):
        raise SchemaError(f"{input_path}: no usable data")
    fig, ax = plt.subplots(figsize=(6, 4.5))
    mesh = ax.pcolormesh(times, ids, grid, cmap="RdBu_r", vmin=0.0, vmax=1.0)
    fig.colorbar(mesh, ax=ax, label="qubit excited population")
    ax.set_xlabel("time (us)")
    ax.set_ylabel("trial")
    ax.set_title("Relaxation across trial ensemble")
    save(fig, output_path, dpi)


def main(argv=None) -> int:
    args = make_parser(__doc__).parse_args(argv)
    render(args.input, args.output, args.dpi)
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
