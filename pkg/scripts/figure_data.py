"""Write the curve data for the Fock family, purity and minimum-spread figures.

    python3 scripts/figure_data.py --out results/figures [--config CONFIG]
"""
import argparse
from pathlib import Path

from homodyne_lab.cli import cmd_figures
from homodyne_lab.config import ExperimentConfig, load_config


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out", type=Path, default=Path("results/figures"))
    ap.add_argument("--config", type=Path)
    args = ap.parse_args()
    cfg = load_config(args.config) if args.config else ExperimentConfig()
    cmd_figures(cfg, args.out)
    for path in sorted(args.out.glob("*.csv")):
        print(f"{path}: {len(path.read_text().splitlines()) - 1} rows")


if __name__ == "__main__":
    main()
