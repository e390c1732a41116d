"""Distance statistics: per-trial T1 scatter colored by the strongest
defect's distance-to-JJ category, plus per-category averages.

Input schema (fig4_stats.csv): trial_id,seed,t1_us,t1_lower_bound_us,
t2_us,oscillatory,distance_um,pe_hz,delta0_norm,omega_hz,category
"""

import math

import matplotlib.pyplot as plt
import numpy as np

from .common import SchemaError, make_parser, read_csv, save

COLUMNS = (
    "trial_id",
    "seed",
    "t1_us",
    "t1_lower_bound_us",
    "t2_us",
    "oscillatory",
    "distance_um",
    "pe_hz",
    "delta0_norm",
    "omega_hz",
    "category",
)

STYLE = {
    "<0.3um": dict(color="black", marker="s", label="< 0.3 um"),
    "0.3-5um": dict(color="purple", marker="o", label="0.3 - 5 um"),
    ">5um": dict(color="grey", marker="x", label="> 5 um"),
}


def render(input_path, output_path, dpi=150) -> None:
    data = read_csv(input_path, COLUMNS)
    rows = [
        (int(i), t1, cat)
        for i, t1, cat in zip(data["trial_id"], data["t1_us"], data["category"])
        if isinstance(t1, float) and not math.isnan(t1)
    ]
    if not rows:
        raise SchemaError(f"{input_path}: no fitted trials to plot")
    fig, (ax1, ax2) = plt.subplots(
        1, 2, figsize=(8, 4), gridspec_kw={"width_ratios": [2, 1]}
    )
    for cat, style in STYLE.items():
        pts = [(i, t1) for i, t1, c in rows if c == cat]
        if pts:
            xs, ys = zip(*pts)
            ax1.scatter(xs, ys, s=22, **style)
    ax1.set_yscale("log")
    ax1.set_xlabel("trial")
    ax1.set_ylabel("T1 (us)")
    ax1.legend(fontsize=8)

    cats = list(STYLE)
    means, stds = [], []
    for cat in cats:
        vals = [t1 for _, t1, c in rows if c == cat]
        means.append(np.mean(vals) if vals else np.nan)
        stds.append(np.std(vals) if vals else 0.0)
    ax2.bar(
        range(len(cats)),
        means,
        yerr=stds,
        color=[STYLE[c]["color"] for c in cats],
        alpha=0.7,
        capsize=4,
    )
    ax2.set_xticks(range(len(cats)))
    ax2.set_xticklabels([STYLE[c]["label"] for c in cats], fontsize=8)
    ax2.set_ylabel("mean T1 (us)")
    fig.suptitle("T1 vs strongest-defect proximity to the JJ")
    save(fig, output_path, dpi)


def main(argv=None) -> int:
    args = make_parser(__doc__).parse_args(argv)
    render(args.input, args.output, args.dpi)
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
