"""Dual-axis decay figure: qubit population (left) and coherence (right).

Input schema (fig2_decay.csv): t_us,p_qubit,coherence_abs
"""

import matplotlib.pyplot as plt

from .common import make_parser, read_csv, save

COLUMNS = ("t_us", "p_qubit", "coherence_abs")


def render(input_path, output_path, dpi=150) -> None:
    data = read_csv(input_path, COLUMNS)
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.plot(data["t_us"], data["p_qubit"], color="black", label="population")
    ax.set_xlabel("time (us)")
    ax.set_ylabel("qubit excited population", color="black")
    ax.set_ylim(bottom=0)
    ax2 = ax.twinx()
    ax2.plot(data["t_us"], data["coherence_abs"], color="tab:green", label="coherence")
    ax2.set_ylabel("|coherence|", color="tab:green")
    ax2.set_ylim(bottom=0)
    ax.set_title("Qubit relaxation and dephasing")
    save(fig, output_path, dpi)


def main(argv=None) -> int:
    args = make_parser(__doc__).parse_args(argv)
    render(args.input, args.output, args.dpi)
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
