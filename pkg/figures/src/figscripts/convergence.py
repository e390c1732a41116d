"""Retained-defect-count convergence: T1 vs k, one line per trial.

Input schema (fig4_convergence.csv): k,t1_us,trial_id
"""

import math

import matplotlib.pyplot as plt

from .common import SchemaError, make_parser, read_csv, save

COLUMNS = ("k", "t1_us", "trial_id")


def render(input_path, output_path, dpi=150) -> None:
    data = read_csv(input_path, COLUMNS)
    series: dict[int, list] = {}
    for k, t1, tid in zip(data["k"], data["t1_us"], data["trial_id"]):
        if isinstance(t1, float) and not math.isnan(t1):
            series.setdefault(int(tid), []).append((k, t1))
    if not series:
        raise SchemaError(f"{input_path}: no fitted points to plot")
    fig, ax = plt.subplots(figsize=(5.5, 4))
    for tid, pts in sorted(series.items()):
        pts.sort()
        ax.plot(*zip(*pts), marker="o", ms=3, lw=1, label=f"trial {tid}")
    ax.set_yscale("log")
    ax.set_xlabel("retained defects k")
    ax.set_ylabel("T1 (us)")
    ax.set_title("T1 convergence with retained-defect count")
    if len(series) <= 10:
        ax.legend(fontsize=7)
    save(fig, output_path, dpi)


def main(argv=None) -> int:
    args = make_parser(__doc__).parse_args(argv)
    render(args.input, args.output, args.dpi)
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
