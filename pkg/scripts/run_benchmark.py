"""Run the comparative convergence study and write residual curves.

Reproduces the 200-instance experiment at desk scale: per instance a random
2x2 single-input system, a stabilizing standard-normal initial gain, the
policy-iteration optimum, and the three gradient flows from the shared
start. Writes one residual CSV per instance plus summary.json.

Usage:
    python scripts/run_benchmark.py --out results/bench [--seed 0] [--instances 200]
"""

import argparse
import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "src"))

from gainflow import cli  # noqa: E402


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out", default="results/bench")
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--instances", type=int, default=200)
    args = parser.parse_args()

    config_path = Path(args.out).with_suffix(".config.json")
    config_path.parent.mkdir(parents=True, exist_ok=True)
    config_path.write_text(
        cli.dump_json({"num_instances": args.instances, "seed": args.seed}) + "\n"
    )
    return cli.main(["bench", "--config", str(config_path), "--out", args.out])


if __name__ == "__main__":
    raise SystemExit(main())
