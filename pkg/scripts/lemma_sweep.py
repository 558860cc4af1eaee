"""Randomized check of the L1 energy inequalities over many seeds."""

import argparse

from vofrac.estimates import lemma_sweep


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--trials", type=int, default=1000)
    parser.add_argument("--seeds", type=int, default=10)
    parser.add_argument("--max-len", type=int, default=50)
    args = parser.parse_args()

    worst = {}
    total = 0
    for seed in range(args.seeds):
        sweep = lemma_sweep(args.trials, seed, max_len=args.max_len)
        total += sum(sweep.failures.values())
        for name, value in sweep.worst.items():
            worst[name] = min(worst.get(name, value), value)
    print(f"{args.seeds * args.trials} trials per inequality, {total} failures")
    for name, value in worst.items():
        print(f"  {name}: worst scaled margin {value:+.3e}")


if __name__ == "__main__":
    main()
