"""Table of the base-m constants: k_m, q_m, Khinchin chi_m, growth constant
and its bound, and the two entropy evaluations."""

import argparse

from chancf import ChanParams
from chancf.ergodic_stats import entropy, khinchin_chi, levy_growth, levy_growth_bound
from chancf.transfer_operator import q_bound


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--m-max", type=int, default=10)
    args = ap.parse_args()

    print(f"{'m':>3} {'k_m':>12} {'q_m':>10} {'chi_m':>10} {'growth':>10} {'bound':>10}"
          f" {'h (quad)':>12} {'h (identity)':>12}")
    for m in range(2, args.m_max + 1):
        h = entropy(m)
        print(f"{m:>3} {ChanParams(m).k_m:12.9f} {q_bound(m):10.6f} {khinchin_chi(m).value:10.7f}"
              f" {levy_growth(m).value:10.7f} {levy_growth_bound(m):10.7f}"
              f" {h.quadrature.value:12.9f} {h.identity.value:12.9f}")


if __name__ == "__main__":
    main()
