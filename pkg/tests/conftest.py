"""Shared fixtures: closed-form reference systems used across the suite."""

import numpy as np
import pytest

from qldet.statespace import StateSpace


def appendix_b_primed(g: float):
    """Frozen controllable-canonical pre-realization and its constraint
    solution for the de-dimensionalized first-order pair (ratio g < 1)."""
    ag = abs(g - 1.0)
    c1 = np.sqrt(2.0) * np.sqrt(1.0 + g ** 2) * ag
    a = np.array([[-(1.0 + g) ** 2, c1],
                  [c1, -(2.0 + g + g ** 3)]]) / (3.0 + g ** 2)
    b = np.array([[0.0, np.sqrt(2.0 / (3.0 + g ** 2))],
                  [0.5 * np.sqrt((3.0 + g ** 2) / (1.0 + g ** 2)),
                   (g ** 2 - 1.0) / (2.0 * np.sqrt(3.0 + 4.0 * g ** 2 + g ** 4))]])
    c = np.array([[(1.0 + g) ** 2 * ag / np.sqrt(2.0 * (3.0 + g ** 2)),
                   2.0 * (1.0 + g) * (1.0 + g ** 2)
                   / np.sqrt(3.0 + 4.0 * g ** 2 + g ** 4)],
                  [(1.0 + g) * np.sqrt((3.0 + g ** 2) / 2.0), 0.0]])
    d = -np.eye(2)
    x = np.array([[-2.0 / (3.0 + 3.0 * g + g ** 2 + g ** 3),
                   np.sqrt(3.0 + 4.0 * g ** 2 + g ** 4) * ag
                   / (np.sqrt(2.0) * (1.0 + g ** 2) * (3.0 + g ** 2) ** 1.5)],
                  [(1.0 - g) / (np.sqrt(2.0 * (1.0 + g ** 2)) * (3.0 + g ** 2)),
                   2.0 / (3.0 + 3.0 * g + g ** 2 + g ** 3)]])
    return StateSpace(a, b, c, d), x


def expander_pole_zero(gamma: float, chi: float, omega_s: float):
    """Pole/zero quadruple (alpha1, beta1, alpha2, beta2) of the lossless
    coupled-cavity pair with the given rates."""
    a2, b2 = np.roots([1.0, -(gamma + chi), omega_s ** 2])
    a1, b1 = np.roots([1.0, -(chi - gamma), omega_s ** 2])
    return a1, b1, a2, b2


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)
