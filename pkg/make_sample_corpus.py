#!/usr/bin/env python3
"""
Write the synthetic sample corpus used by data/sample/sample.cfg.

Usage:
    python make_sample_corpus.py
    python make_sample_corpus.py --out data/sample --publications 500 --seed 7
"""

import argparse
import logging
import sys
from pathlib import Path

# Add project root to path
sys.path.insert(0, str(Path(__file__).parent))

from coevo_mapper.sample import DEFAULT_SEED, write_sample_corpus  # noqa: E402


def main():
    """Parse arguments and write the corpus."""
    parser = argparse.ArgumentParser(description="Write the synthetic sample corpus")
    parser.add_argument("--out", "-o", type=str, default="data/sample",
                        help="Directory for publications.txt and awards.csv. Default: data/sample")
    parser.add_argument("--publications", "-n", type=int, default=200,
                        help="Number of publication records. Default: 200")
    parser.add_argument("--seed", "-s", type=int, default=DEFAULT_SEED,
                        help=f"Random seed. Default: {DEFAULT_SEED}")
    args = parser.parse_args()

    logging.basicConfig(level=logging.INFO, format="%(levelname)s: %(message)s")
    paths = write_sample_corpus(args.out, args.publications, args.seed)
    for name, path in paths.items():
        print(f"{name}: {path}")


if __name__ == "__main__":
    main()
