import time

import numpy as np

from ofdmloc import C_LIGHT, SystemConfig, run_sweep

lam = C_LIGHT / 7.2e9


def ds(M):
    return SystemConfig(f_c=7.2e9, delta_f=240e3, Q=32, P=1, D=8, N=5,
                        r_srx=5000 * lam, r_s=4800 * lam, n_grid_per_axis=40,
                        alpha_oversample=4, snr_db=(0, 5, 10, 15, 20, 25, 30),
                        data_constellation=M, n_mc=300, base_seed=7)


np.set_printoptions(precision=4, suppress=True)
for M in (16, 256):
    t0 = time.time()
    res = run_sweep(ds(M), ["P", "PD", "HDD-centr", "MML-fast"], threads=2)
    print(f"=== {M}-QAM sweep: {time.time()-t0:.0f}s ===", flush=True)
    for est in res.estimators:
        print(f"{est:10s} rmse", res.rmse_curve(est), flush=True)
    print("ser  HDD-centr", res.ser_curve("HDD-centr"))
    print("mae  HDD-centr", res.mae_curve("HDD-centr"))
    pd = res.rmse_curve("PD")
    print("ratio PD/MML ", pd / res.rmse_curve("MML-fast"))
    print("ratio MML/P  ", res.rmse_curve("MML-fast") / res.rmse_curve("P"))
    print("ratio PD/HDD ", pd / res.rmse_curve("HDD-centr"))
