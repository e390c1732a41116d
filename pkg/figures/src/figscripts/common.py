"""Shared CSV loading and CLI plumbing for the figure scripts.

Each script consumes one documented CSV schema produced by the simulator
CLI and renders one image. Scripts are stateless: same input, same
output, overwriting idempotently.
"""

from __future__ import annotations

import argparse
import csv
import math

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402  (backend must be set first)


class SchemaError(ValueError):
    """Input CSV does not match the figure's documented columns."""


def read_csv(path, columns: tuple[str, ...]) -> dict[str, list]:
    """Load a CSV with exactly the given header; numeric cells become
    floats ('' and 'nan' become math.nan), everything else stays text."""
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise SchemaError(f"{path}: empty file") from None
        if tuple(header) != columns:
            missing = set(columns) - set(header)
            extra = set(header) - set(columns)
            raise SchemaError(
                f"{path}: header mismatch (missing {sorted(missing)}, "
                f"unexpected {sorted(extra)})"
            )
        rows = [row for row in reader if row]
    if not rows:
        raise SchemaError(f"{path}: no data rows")
    out: dict[str, list] = {c: [] for c in columns}
    for row in rows:
        if len(row) != len(columns):
            raise SchemaError(f"{path}: ragged row {row!r}")
        for c, cell in zip(columns, row):
            out[c].append(_coerce(cell))
    return out


def _coerce(cell: str):
    try:
        return float(cell)
    except ValueError:
        return math.nan if cell == "" else cell


def make_parser(description: str) -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(description=description)
    parser.add_argument("--in", dest="input", required=True, help="input CSV")
    parser.add_argument("--out", dest="output", required=True, help="output image")
    parser.add_argument("--dpi", type=int, default=150)
    return parser


def save(fig, path, dpi=150) -> None:
    fig.savefig(path, dpi=dpi, bbox_inches="tight")
    plt.close(fig)
