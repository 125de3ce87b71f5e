import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from mismatch_mse import ProblemInstance, make_builtin_filter
from mismatch_mse.cli import preset_sweep


def conj_sym_error(samples):
    """max |x[j] - conj(x[(N - j) mod N])| over the grid."""
    samples = np.asarray(samples)
    return float(np.max(np.abs(samples - np.conj(np.roll(samples[::-1], 1)))))


def identity_instance(beta=1.0, p_x=1.0, grid_size=1024):
    one = make_builtin_filter("ideal_lpf", {"cutoff": np.pi, "gain": 1.0},
                              grid_size)
    return ProblemInstance(h_true=one, h_assumed=one, beta=beta, p_x=p_x)


def lpf_instance(cutoff, gain=1.0, grid_size=4096, beta=1.0, p_x=1.0):
    """True channel: half-band low-pass; assumed: low-pass (cutoff, gain)."""
    h = make_builtin_filter("ideal_lpf", {"cutoff": np.pi / 2, "gain": 1.0},
                            grid_size)
    hp = make_builtin_filter("ideal_lpf", {"cutoff": cutoff, "gain": gain},
                             grid_size)
    return ProblemInstance(h_true=h, h_assumed=hp, beta=beta, p_x=p_x)


@pytest.fixture(scope="session")
def example_instances():
    """One representative instance per preset family, default grid."""
    return {
        "example1": preset_sweep("example1").instance_at(0.7 * np.pi),
        "example2": preset_sweep("example2").instance_at(3 * np.pi / 16),
        "example3": preset_sweep("example3").instance_at(0.35 * np.pi),
        "example4": preset_sweep("example4").instance_at(1),
    }


@pytest.fixture(scope="session")
def matched_family():
    """Five distinct true channels, each in a matched instance."""
    insts = [identity_instance(grid_size=4096)]
    for name, value in [("example1", np.pi / 2), ("example2", np.pi / 4),
                        ("example3", 0.8 * np.pi), ("example4", 0)]:
        spec = preset_sweep(name)
        inst = spec.instance_at(value)
        insts.append(ProblemInstance(h_true=inst.h_true,
                                     h_assumed=inst.h_true,
                                     beta=inst.beta, p_x=inst.p_x))
    return insts
