"""Anatomy of one localization trial: objective surfaces and refined estimates.

Builds a single noisy realization, evaluates the pilot-only, genie, and
marginal-likelihood objectives over the coarse grid, and compares the
refined position estimates.

Run:  python demos/03_single_trial.py
"""

import math

import numpy as np

from ofdmloc import (ObjectiveContext, build_resource_grid, build_scene, genie_equalize,
                     grid_search, make_grid, nelder_mead_refine, objective_equalized,
                     objective_mml_fast, objective_pilot, observe, pilot_equalize,
                     synthesize_channel, SystemConfig)

cfg = SystemConfig(Q=32, P=1, D=8, N=5, delta_f=240e3, data_constellation=16,
                   n_grid_per_axis=40, snr_db=(10.0,), n_mc=1)
rng = np.random.default_rng(4)
scene = build_scene(cfg, rng)
chan = synthesize_channel(scene, cfg, rng)
frame = build_resource_grid(cfg, rng)
sigma2 = cfg.sigma2_for(10.0)
obs = observe(chan, frame, sigma2, rng)

pilot_eq = pilot_equalize(obs.Y_P, frame.X)
ctx = ObjectiveContext(cfg=cfg, nodes=scene.node_positions,
                       equalized={"pilot": pilot_eq,
                                  "genie": genie_equalize(pilot_eq, obs.Y_D, frame.S)},
                       pilot_energy=frame.pilot_energy, data_obs=obs.Y_D,
                       sigma2=sigma2, gamma=cfg.gamma, c_map=frame.c_map)

objectives = {
    "pilot-only": lambda pts: objective_pilot(ctx, pts),
    "genie (data known)": lambda pts: objective_equalized(ctx, pts, "genie"),
    "marginal likelihood": lambda pts: objective_mml_fast(ctx, pts),
}

grid = make_grid(cfg)
print(f"truth at ({scene.ue_position[0]:.2f}, {scene.ue_position[1]:.2f}) m; "
      f"grid {grid.per_axis}x{grid.per_axis}, cell {grid.cell:.2f} m\n")
for name, objective in objectives.items():
    coarse, _ = grid_search(objective, grid)
    refined = nelder_mead_refine(objective, coarse, initial_scale=grid.cell)
    err = math.dist(refined, scene.ue_position)
    print(f"{name:22s} coarse ({coarse[0]:8.2f}, {coarse[1]:8.2f}) -> "
          f"refined ({refined[0]:8.2f}, {refined[1]:8.2f}), error {err:6.3f} m")

print("\nthe marginal-likelihood estimate tracks the genie despite never "
      "demodulating the data payload")
