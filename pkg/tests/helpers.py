"""Shared test utilities: random admissible systems, stabilizing gains, and
finite-difference gradients used as the independent oracle."""

import numpy as np

from gainflow import bench, lqr_core
from gainflow.lqr_core import SystemInstance


def random_spd(rng, n, scale=1.0):
    """Random symmetric positive definite matrix with eigenvalues in
    roughly [0.3, 1.3] * scale."""
    w = scale * (0.3 + rng.random(n))
    q, _ = np.linalg.qr(rng.standard_normal((n, n)))
    return (q * w) @ q.T


def random_admissible_system(rng, n, m, identity_weights=True):
    """Admissible instance; optionally with random SPD weights so the
    R != I code paths get exercised."""
    for _ in range(1000):
        a = rng.standard_normal((n, n))
        b = rng.standard_normal((n, m))
        if not np.any(b):
            continue
        q = np.eye(n) if identity_weights else random_spd(rng, n)
        r = np.eye(m) if identity_weights else random_spd(rng, m)
        sys_ = SystemInstance(a=a, b=b, q=q, r=r)
        rep = lqr_core.check_assumptions(sys_)
        if rep.stabilizable and rep.detectable:
            return sys_
    raise AssertionError("could not draw an admissible system")


def stabilizing_pair(rng, n, m, identity_weights=True):
    """(system, stabilizing gain); redraws the system when no
    standard-normal gain stabilizes it."""
    for _ in range(100):
        sys_ = random_admissible_system(rng, n, m, identity_weights)
        for _ in range(2000):
            k = rng.standard_normal((m, n))
            if lqr_core.in_stabilizing_set(sys_, k):
                return sys_, k
    raise AssertionError("could not draw a stabilizing pair")


def lyapunov_stabilizing_gain(sys_):
    """Deterministic stabilizing gain via the classical shifted-Lyapunov
    construction: solve (A + bI) Z + Z (A + bI)^T = 2 B B^T with b just past
    the spectral abscissa of A, then K = B^T Z^{-1}. Works whenever (A, B)
    is controllable, which holds almost surely for the random draws here;
    near-uncontrollable draws yield huge gains, which callers should treat
    as a reason to redraw the system."""
    from gainflow import matlin

    shift = max(matlin.spectrum(sys_.a).abscissa, 0.0) + 1.0
    z = lqr_core.lyapunov_solve(sys_.a + shift * np.eye(sys_.n),
                                -2.0 * sys_.b @ sys_.b.T)
    k = np.linalg.solve(z, sys_.b).T
    assert lqr_core.in_stabilizing_set(sys_, k)
    return k


def sigma_set_gain(rng, sys_, box=3.0):
    """Gain in the effective domain (sigma set), stable or not."""
    for _ in range(1000):
        k = box * rng.standard_normal((sys_.m, sys_.n))
        if lqr_core.in_sigma_set(sys_, k):
            return k
    raise AssertionError("could not draw a sigma-set gain")


def fd_gradient(func, k, h_scale=1e-6):
    """Central finite differences with per-entry step h = h_scale*(1+|k_ij|)."""
    k = np.asarray(k, dtype=float)
    grad = np.zeros_like(k)
    for i in range(k.shape[0]):
        for j in range(k.shape[1]):
            h = h_scale * (1.0 + abs(k[i, j]))
            kp = k.copy()
            km = k.copy()
            kp[i, j] += h
            km[i, j] -= h
            grad[i, j] = (func(kp) - func(km)) / (2.0 * h)
    return grad


def rel_err(got, want):
    want = np.asarray(want, dtype=float)
    denom = np.linalg.norm(want)
    return np.linalg.norm(np.asarray(got, dtype=float) - want) / (denom if denom else 1.0)
