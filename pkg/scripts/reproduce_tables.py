"""Rerun the three error tables for the polynomial test problem and compare with the stored values."""

import argparse
import sys
import time
from pathlib import Path

from vofrac.cli import write_tables
from vofrac.verify import REFERENCE_SIGMA, reproduce_tables


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--sigma", type=float, default=REFERENCE_SIGMA)
    parser.add_argument("--out", type=Path, default=None, help="directory for table CSVs")
    args = parser.parse_args()

    start = time.perf_counter()
    result = reproduce_tables(args.sigma)
    print(result.format())
    print(f"\nwall time {time.perf_counter() - start:.1f} s")
    if args.out is not None:
        write_tables(result, args.out)
    return 0 if result.passed else 1


if __name__ == "__main__":
    sys.exit(main())
