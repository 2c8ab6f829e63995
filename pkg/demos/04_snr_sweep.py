"""Small Monte Carlo sweep: RMSE versus SNR for every estimator family.

A reduced-size version of the full evaluation (fewer trials, smaller frame)
that still shows the qualitative behavior: the marginal-likelihood estimator
tracks the genie bound at much lower SNR than decision-directed processing,
and the pilot-only baseline trails everything.

Run:  python demos/04_snr_sweep.py          (a few minutes; plots if matplotlib)
"""

import time

import numpy as np

from ofdmloc import SystemConfig, run_sweep

cfg = SystemConfig(Q=32, P=1, D=8, N=5, delta_f=240e3, data_constellation=16,
                   n_grid_per_axis=40, snr_db=(0, 5, 10, 15, 20, 25),
                   n_mc=40, base_seed=1)
estimators = ("P", "PD", "HDD-centr", "HDD-distr", "SDD-centr", "MML-fast")

t0 = time.time()
res = run_sweep(cfg, estimators)
print(f"{cfg.n_mc} trials x {len(cfg.snr_db)} SNR points in {time.time()-t0:.0f}s\n")

header = "SNR(dB) " + "".join(f"{e:>12s}" for e in estimators)
print(header)
for snr in cfg.snr_db:
    cells = "".join(f"{res.row(e, snr).rmse_lambda:12.2f}" for e in estimators)
    print(f"{snr:7.0f} {cells}")
print("\n(RMSE in carrier wavelengths; lambda_c = %.2f cm)" % (cfg.lambda_c * 100))

ser = res.ser_curve("HDD-centr")
mae = res.mae_curve("HDD-centr")
print("\ncentralized demodulation quality:")
print("SER:", np.array2string(ser, precision=3))
print("MAE:", np.array2string(mae, precision=3))

try:
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    fig, ax = plt.subplots(figsize=(7, 5))
    for est in estimators:
        ax.semilogy(cfg.snr_db, res.rmse_curve(est) / cfg.lambda_c, marker="o", label=est)
    ax.set_xlabel("per-node average SNR (dB)")
    ax.set_ylabel("RMSE / wavelength")
    ax.grid(True, which="both", alpha=0.3)
    ax.legend()
    fig.tight_layout()
    fig.savefig("demo_sweep.png", dpi=120)
    print("\nsaved demo_sweep.png")
except ImportError:
    print("\nmatplotlib not available; skipping the plot")
