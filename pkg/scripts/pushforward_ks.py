"""Monte-Carlo pushforward: KS distance of tau_m^n(U) from omega_m.

Prints KS_n for a Lebesgue start and for a start drawn from gamma_m (which
should stay flat at the sampling-noise level).
"""

import argparse

from chancf import ChanParams
from chancf.ergodic_stats import SimulationConfig, simulate_pushforward
from chancf.invariant_measure import MeasureSpec


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--m", type=int, default=2)
    ap.add_argument("--samples", type=int, default=1_000_000)
    ap.add_argument("--iters", type=int, default=12)
    ap.add_argument("--seed", type=int, default=42)
    ap.add_argument("--threads", type=int, default=1)
    args = ap.parse_args()

    p = ChanParams(args.m)
    leb = simulate_pushforward(SimulationConfig(p, args.samples, args.iters, seed=args.seed),
                               threads=args.threads)
    gam = simulate_pushforward(SimulationConfig(p, args.samples, args.iters, seed=args.seed + 1,
                                                initial=MeasureSpec("gamma", p)),
                               threads=args.threads)
    print(f"sampling noise ~ {leb.sampling_noise:.5f}")
    print(f"{'n':>3} {'KS lebesgue':>12} {'KS gamma':>10}")
    for n in range(args.iters + 1):
        print(f"{n:>3} {leb.ks[n]:12.5f} {gam.ks[n]:10.5f}")


if __name__ == "__main__":
    main()
