import numpy as np
import pytest

from ofdmloc import C_LIGHT, SystemConfig

LAMBDA = C_LIGHT / 7.2e9


def desk_config(M=16, **overrides):
    """Desk-scale configuration used by the acceptance criteria."""
    base = dict(f_c=7.2e9, delta_f=240e3, Q=32, P=1, D=8, N=5,
                r_srx=5000 * LAMBDA, r_s=4800 * LAMBDA,
                n_grid_per_axis=40, alpha_oversample=4,
                snr_db=(0.0, 5.0, 10.0, 15.0, 20.0, 25.0, 30.0),
                data_constellation=M, n_mc=300, base_seed=7)
    base.update(overrides)
    return SystemConfig(**base)


def tiny_config(**overrides):
    """Small, fast configuration for unit tests (coarse grid, few cells)."""
    base = dict(f_c=7.2e9, delta_f=480e3, Q=8, P=1, D=2, N=3,
                r_srx=150.0, r_s=60.0, n_grid_per_axis=2, alpha_oversample=1,
                snr_db=(15.0,), data_constellation=4, n_mc=2, base_seed=0)
    base.update(overrides)
    return SystemConfig(**base)


def table1_config(**overrides):
    """The full-scale default parameter set."""
    base = dict(f_c=7.2e9, delta_f=60e3, Q=128, P=1, D=35, N=5,
                r_srx=5000 * LAMBDA, r_s=4800 * LAMBDA,
                n_grid_per_axis=40, alpha_oversample=4,
                data_constellation=256, n_mc=3000, base_seed=0)
    base.update(overrides)
    return SystemConfig(**base)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture
def tiny_cfg():
    return tiny_config()
