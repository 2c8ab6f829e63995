"""Computation and transmission cost accounting per estimator.

Prints measured operation counts next to the instantiated asymptotic
formulas, then the per-node forwarding cost that distinguishes distributed
from centralized processing.

Run:  python demos/05_cost_accounting.py
"""

from ofdmloc import SystemConfig, account_complexity, account_transmission

cfg = SystemConfig(Q=16, D=4, N=4, delta_f=480e3, data_constellation=64,
                   r_srx=150.0, r_s=60.0, n_grid_per_axis=8, alpha_oversample=1,
                   snr_db=(15.0,), n_mc=1)

print(f"config: Q={cfg.Q}, D={cfg.D}, N={cfg.N}, M={cfg.data_constellation}\n")
print(f"{'estimator':<11s} {'step':<26s} {'measured':>10s} {'formula':<14s} {'value':>8s}")
for est in ("P", "PD", "HDD-centr", "HDD-distr", "MML-approx", "MML-fast"):
    for row in account_complexity(cfg, est):
        print(f"{row.estimator:<11s} {row.step:<26s} {row.measured_ops:>10d} "
              f"{row.formula:<14s} {row.instantiated:>8d}")
    print()

print("the accelerated marginal objective replaces the O(M) constellation scan")
print("with O(sqrt(M)) amplitude levels per cell; compare the last rows above.\n")

full = SystemConfig()  # full-scale defaults: Q=128, D=35, 40^2 nominal grid
print("per-node transmission (full-scale defaults):")
for est in ("P", "HDD-distr", "HDD-centr", "MML-fast"):
    t = account_transmission(full, est)
    print(f"{est:<10s} grid scalars {t.grid_scalars:>5d} + data coefficients "
          f"{t.data_coeffs:>5d} (= {t.total_scalars} real scalars)")
print("\nforwarding raw data cells (Q*D = 4480 coefficients) outweighs the")
print("1600-point correlation table, the distributed methods' one advantage")
