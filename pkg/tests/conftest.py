import math

import numpy as np
import pytest

from pwlcycles import PWLSystem, SystemParams, make_cosine, make_oscillatory, make_sine, make_zero

GAMMA_SINE = 0.75
GAMMA_COSINE = 0.4
ALPHA_OSC = 0.3

EXP_MINUS_GAMMA_PI = math.exp(-GAMMA_SINE * math.pi)  # 0.09478022484215486


def sign_safe_grid(lo, hi, n, roots, guard):
    """Evaluation grid that keeps a guard distance from zeros of h.

    The displacement scales as h(y)^3 near a zero, so points with
    |h| ~ 1e-5*y produce |f| below the cancellation floor of double
    precision; nudging such points to the guard distance keeps every
    sampled sign resolvable while still probing arbitrarily many points.
    """
    ys = np.linspace(lo, hi, n)
    for r in roots:
        near = np.abs(ys - r) < guard
        ys[near] = np.where(ys[near] < r, r - guard, r + guard)
    return ys


@pytest.fixture(scope="session")
def params075():
    return SystemParams(GAMMA_SINE)


@pytest.fixture(scope="session")
def zero_system(params075):
    return PWLSystem(params075, make_zero())


@pytest.fixture(scope="session")
def sine_system(params075):
    return PWLSystem(params075, make_sine(params075, 2))


@pytest.fixture(scope="session")
def cosine_system():
    params = SystemParams(GAMMA_COSINE)
    return PWLSystem(params, make_cosine(params, 2))


@pytest.fixture(scope="session")
def oscillatory_system():
    return PWLSystem(SystemParams(1.0), make_oscillatory(ALPHA_OSC))
