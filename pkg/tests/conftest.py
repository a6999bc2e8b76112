import numpy as np
import pytest

from wiretap_cc.channel import WiretapChannel
from wiretap_cc.probability import CondPmf
from wiretap_cc.timed_link import build_channel


def bsc(eps: float) -> np.ndarray:
    return np.array([[1 - eps, eps], [eps, 1 - eps]])


def sample_feasible_single_aux(rng, ch, count, v_sizes=(2, 3, 4, 6)):
    """Rejection-sample budget-feasible (v, x) joints of mixed v cardinality."""
    out = []
    k = 0
    while len(out) < count:
        v = v_sizes[k % len(v_sizes)]
        k += 1
        s = rng.dirichlet(np.ones(v * ch.x_size)).reshape(v, ch.x_size)
        if float(s.sum(axis=0) @ ch.cost) <= ch.budget:
            out.append(s)
    return out


def cascade_channel(eps_y: float, eps_z: float) -> WiretapChannel:
    """X through BSC(eps_y) to Y, then Y through BSC(eps_z) to Z, zero cost."""
    w_y = bsc(eps_y)
    w_z_given_y = bsc(eps_z)
    kernel = np.zeros((2, 4))
    for x in range(2):
        for y in range(2):
            for z in range(2):
                kernel[x, y * 2 + z] = w_y[x, y] * w_z_given_y[y, z]
    return WiretapChannel(
        x_size=2, y_size=2, z_size=2,
        kernel=CondPmf(kernel), cost=np.zeros(2), budget=0.0,
    )


@pytest.fixture(scope="session")
def degraded_channel() -> WiretapChannel:
    """Y is strictly less noisy than Z (Z is a degraded version of Y)."""
    return cascade_channel(0.1, 0.15)


@pytest.fixture(scope="session")
def gated_channel() -> WiretapChannel:
    """The four-letter gated link at budget 0.5."""
    return build_channel()


@pytest.fixture(scope="session")
def reversed_channel() -> WiretapChannel:
    """Z is strictly less noisy than Y: the eavesdropper gets the clean output."""
    w_z = bsc(0.1)
    w_y_given_z = bsc(0.15)
    kernel = np.zeros((2, 4))
    for x in range(2):
        for z in range(2):
            for y in range(2):
                kernel[x, y * 2 + z] = w_z[x, z] * w_y_given_z[z, y]
    return WiretapChannel(
        x_size=2, y_size=2, z_size=2,
        kernel=CondPmf(kernel), cost=np.zeros(2), budget=0.0,
    )
