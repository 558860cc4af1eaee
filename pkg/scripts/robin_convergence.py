"""Coupled refinement (tau = h^2) for the manufactured problems, Dirichlet and Robin."""

import argparse
from fractions import Fraction

from vofrac.verify import coupled_study, get_problem


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--problems", default="sine-dirichlet,sine-robin")
    parser.add_argument("--hs", default="1/40,1/80,1/160")
    parser.add_argument("--sigma", default="auto")
    args = parser.parse_args()

    hs = [float(Fraction(s)) for s in args.hs.split(",")]
    sigma = args.sigma if args.sigma == "auto" else float(args.sigma)
    for name in args.problems.split(","):
        table = coupled_study(get_problem(name), hs, sigma)
        print(f"{name}\n{table.to_markdown()}\n")


if __name__ == "__main__":
    main()
