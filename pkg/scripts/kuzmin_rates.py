"""Gauss-Kuzmin convergence for several bases.

Iterates the functional equation from the Lebesgue start, fits the
geometric rate of sup|F_n - omega_m| and compares it with the second
eigenvalue of the transfer operator obtained by Chebyshev collocation.
"""

import argparse
import sys
from pathlib import Path

from chancf.transfer_operator import estimate_rate, kuzmin_run

sys.path.insert(0, str(Path(__file__).resolve().parents[1]))
from tests.oracles import second_eigenvalue  # noqa: E402


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--bases", type=int, nargs="+", default=[2, 3, 4, 5, 7, 10])
    ap.add_argument("--grid", type=int, default=4097)
    ap.add_argument("--iters", type=int, default=40)
    args = ap.parse_args()

    print(f"{'m':>3} {'e_10':>11} {'e_40':>11} {'fitted':>9} {'|lambda_2|':>11}")
    for m in args.bases:
        run = kuzmin_run(m, grid_size=args.grid, iters=args.iters)
        rate = estimate_rate(run.sup_errors, (5, 15), floor=run.floor).fitted_rate
        lam = second_eigenvalue(m)[1]
        e = run.sup_errors
        print(f"{m:>3} {e[10]:11.3e} {e[-1]:11.3e} {rate:9.5f} {lam:11.7f}")


if __name__ == "__main__":
    main()
