"""Emit contour-plot data for the 2-state demo system.

Evaluates the Bellman error and the LQR cost over a gain grid covering the
stability boundary k2 = -k1 - 1, including the unstable region where both
objectives continue through the vectorized value solve. Cells where the
value equation is singular carry NaN.

Usage:
    python scripts/make_contours.py --out results/contours [--span 3] [--steps 121]
"""

import argparse
import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "src"))

import numpy as np  # noqa: E402

from gainflow import bench, demo_system  # noqa: E402
from gainflow.cli import fmt_float  # noqa: E402


def write_grid(path: Path, grid) -> None:
    lines = ["k1,k2,value,stable"]
    for i, k1 in enumerate(grid.k1):
        for j, k2 in enumerate(grid.k2):
            lines.append(",".join([
                fmt_float(k1), fmt_float(k2),
                fmt_float(grid.values[i, j]),
                "1" if grid.stable[i, j] else "0",
            ]))
    path.write_text("\n".join(lines) + "\n")


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out", default="results/contours")
    parser.add_argument("--span", type=float, default=3.0)
    parser.add_argument("--steps", type=int, default=121)
    args = parser.parse_args()

    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    sys_ = demo_system()
    box = (-args.span, args.span)
    for objective in ("bellman", "lqr"):
        grid = bench.grid_eval(sys_, box, box, args.steps, objective=objective)
        write_grid(out_dir / f"{objective}_grid.csv", grid)
        finite = grid.values[np.isfinite(grid.values)]
        print(f"{objective}: {grid.values.size} cells, "
              f"{np.isnan(grid.values).sum()} singular, "
              f"value range [{finite.min():.4g}, {finite.max():.4g}]")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
