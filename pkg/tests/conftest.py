"""Shared fixtures: a small transfer scenario and a config file factory."""

import numpy as np
import pytest

from gpeopt import Grid, HarmonicTrap2P, Scenario, ground_state


TINY_GRID = Grid((16, 16, 8), (6.0, 6.0, 3.0))
TINY_MODEL = HarmonicTrap2P(2.0, 1.0, 1.0, 2.0, 2.0)
TINY_G = 100.0


@pytest.fixture(scope="session")
def tiny_states():
    """Ground states of the tiny trap at both control endpoints."""
    psi0 = ground_state(TINY_MODEL, [0.0, 0.0], TINY_GRID, TINY_G).state
    target = ground_state(TINY_MODEL, [1.0, 1.0], TINY_GRID, TINY_G).state
    return psi0, target


@pytest.fixture(scope="session")
def tiny_scenario(tiny_states):
    psi0, target = tiny_states
    return Scenario(
        grid=TINY_GRID,
        model=TINY_MODEL,
        g=TINY_G,
        gamma=1e-6,
        psi0=psi0,
        psi_target=target,
    )


TINY_TOML = """\
[scenario]
name = "tiny"

[units]
atom_count = 1500
scattering_length_m = 5.24e-9
mass_kg = 1.44e-25
length_unit_m = 1e-6

[grid]
dims = [16, 16, 8]
extent = [6.0, 6.0, 3.0]

[trap]
kind = "harmonic-2p"
omega_x_initial = {{ hz = 1464.8, angular = true }}
omega_x_final = {{ hz = 732.4, angular = true }}
omega_y_initial = {{ hz = 732.4, angular = true }}
omega_y_final = {{ hz = 1464.8, angular = true }}
omega_z = {{ hz = 1464.8, angular = true }}

[protocol]
horizon_ms = 2.0
dt_ms = 0.02

[control]
guess = "sine-offset"
start = [0.0, 0.0]
end = [1.0, 1.0]
amplitudes = [0.25, -0.25]

[cost]
gamma = 1e-6

[optimize]
method = "hz-nlcg"
max_iters = {max_iters}

[bdg]
n_modes = 1
control_point = "start"

[propagate]
record_stride = 50
"""


@pytest.fixture
def tiny_config_file(tmp_path):
    """Write the tiny scenario TOML and return its path."""

    def factory(max_iters=2, extra=""):
        text = TINY_TOML.format(max_iters=max_iters) + extra
        path = tmp_path / "tiny.toml"
        path.write_text(text)
        return path

    return factory


def smooth_direction(control, seed=0, modes=5):
    """Band-limited random variation vanishing at the endpoints."""
    rng = np.random.default_rng(seed)
    t = np.linspace(0.0, control.horizon, control.steps + 1)
    d = np.zeros_like(control.samples)
    for j in range(d.shape[1]):
        for k in range(1, modes + 1):
            d[:, j] += rng.normal() * np.sin(k * np.pi * t / control.horizon)
    d[0] = 0.0
    d[-1] = 0.0
    d /= np.max(np.abs(d))
    return control.with_samples(d)
