import numpy as np
import pytest

from gainflow import SystemInstance, demo_system


@pytest.fixture
def demo_sys():
    "Two-state single-input system with known closed-form surfaces."
    return demo_system()


@pytest.fixture
def scalar_sys():
    "A = -1, B = 1, Q = 1, R = 1: everything solvable by hand."
    return SystemInstance(a=[[-1.0]], b=[[1.0]], q=[[1.0]], r=[[1.0]])


@pytest.fixture
def rng():
    return np.random.default_rng(20260809)
