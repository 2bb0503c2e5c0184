"""Mellin-type zeta identities in the critical strip.

Compares the Gauss-map representation of zeta with mpmath at a few points
(including the first nontrivial zero) and the base-m branch sum with direct
quadrature and the geometric closed form.
"""

import mpmath

from chancf.zeta_mellin import chan_zeta, chan_zeta_geometric, chan_zeta_quadrature, gauss_map_zeta


def main():
    points = [0.5, 0.25 + 3j, 0.75 - 10j, complex(mpmath.zetazero(1))]
    print("Gauss map:")
    for s in points:
        r = gauss_map_zeta(s)
        ref = complex(mpmath.zeta(s))
        print(f"  s = {s:.6g}: {r.value:.12g}  |diff| = {abs(r.value - ref):.1e}  (error {r.error:.1e})")
    print("base m:")
    for m in (2, 3, 5):
        for s in (0.5, 0.25 + 0.75j):
            a = chan_zeta(s, m)
            q = chan_zeta_quadrature(s, m)
            g = chan_zeta_geometric(s, m)
            print(f"  m = {m}, s = {s:.4g}: {a.value:.12g}  quad {abs(a.value - q.value):.1e}"
                  f"  closed form {abs(a.value - g):.1e}")


if __name__ == "__main__":
    main()
