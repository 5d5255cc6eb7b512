"""Early-stopped GD is instance-wise competitive with ridge.

For each ridge regularization lambda we run GD for t = ceil(1/(eta*lambda))
steps and compare (a) the theoretical bounds, which share the same critical
index and effective regularization, and (b) the exact risks on shared
design draws, whose ratio stays bounded by a modest constant.
"""

import numpy as np

from risklab import (
    dominance_gd_vs_ridge,
    gd_ridge_type_bound,
    make_power_law_problem,
    ridge_bound,
)


def main():
    prob = make_power_law_problem(a=2.0, r=1.0, d=2000)
    n = 200
    eta = 1.0 / (2.0 * prob.spectrum.trace)
    lam_grid = np.geomspace(1e-4, 1.0, 7)

    print(f"power-law problem: a=2, r=1, d={prob.d}, n={n}")
    print("\nmatched bounds (same k*, lambda-tilde within a factor 2):")
    print(f"{'lambda':>10} {'t':>6} {'k*_ridge':>8} {'k*_gd':>6} "
          f"{'upper_ridge':>12} {'upper_gd':>12}")
    for lam in lam_grid:
        t = int(np.ceil(1.0 / (eta * lam)))
        rb = ridge_bound(prob, n, lam)
        gb = gd_ridge_type_bound(prob, n, eta, t)
        print(f"{lam:10.2e} {t:6d} {rb.k_star:8d} {gb.k_star:6d} "
              f"{rb.upper_total:12.4e} {gb.upper_total:12.4e}")

    print("\nexact GD/ridge risk ratios over 8 shared design draws:")
    rows = dominance_gd_vs_ridge(prob, n, lam_grid, eta, trials=8, seed=0)
    print(f"{'lambda':>10} {'t':>6} {'ratio_mean':>10} {'ratio_max':>10}")
    for row in rows:
        print(f"{row['lam']:10.2e} {row['t']:6d} "
              f"{row['ratio_mean']:10.4f} {row['ratio_max']:10.4f}")
    worst = max(r["ratio_max"] for r in rows)
    print(f"\nworst-case ratio {worst:.3f}: GD never loses by more than a "
          "small constant, and wins outright at small lambda.")


if __name__ == "__main__":
    main()
