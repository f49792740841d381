"""Collective spin algebra in the Dicke basis.

States are plain complex numpy arrays. The first axis indexes the Dicke
basis |S, m> in the fixed order m = S, S-1, ..., -S; any trailing axes are
carried along untouched, so a (2S+1, n) array is a batch of n states.
"""

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

import numpy as np
from scipy.linalg import eigh_tridiagonal


def two_s_of(S):
    """Return the integer 2S, rejecting anything that is not a half-integer >= 0."""
    two_s = Fraction(S).limit_denominator(1000) * 2
    if two_s.denominator != 1 or abs(float(two_s) - 2 * float(S)) > 1e-9:
        raise ValueError(f"spin S={S!r} is not a half-integer")
    if two_s < 0:
        raise ValueError(f"spin S={S!r} is negative")
    return int(two_s)


def spin_dim(S):
    return two_s_of(S) + 1


def m_values(S):
    """Magnetic quantum numbers in basis order, S down to -S."""
    two_s = two_s_of(S)
    return two_s / 2 - np.arange(two_s + 1)


@dataclass(frozen=True)
class CollectiveOps:
    """Dense Sx, Sy, Sz for one spin S, plus the cached Sx eigenbasis.

    ``x_basis`` has the Sx eigenvector for eigenvalue m in column j, where
    m = m_values(S)[j]; in other words ``Sx = x_basis @ diag(m) @ x_basis.T``.
    The matrices are shared between callers and must not be mutated.
    """

    S: float
    m: np.ndarray
    Sx: np.ndarray
    Sy: np.ndarray
    Sz: np.ndarray
    Splus: np.ndarray
    x_basis: np.ndarray

    @property
    def dim(self):
        return len(self.m)


def _ladder(two_s):
    S = two_s / 2
    m = S - np.arange(two_s + 1)
    # <S, m+1| S+ |S, m> on the superdiagonal (row j-1, column j)
    return np.sqrt(S * (S + 1) - m[1:] * (m[1:] + 1))


@lru_cache(maxsize=64)
def _ops(two_s):
    S = two_s / 2
    m = S - np.arange(two_s + 1)
    up = _ladder(two_s)
    splus = np.diag(up, 1)
    sx = (splus + splus.T) / 2
    sy = (splus - splus.T) / 2j
    sz = np.diag(m)
    if two_s == 0:
        x_basis = np.ones((1, 1))
    else:
        evals, evecs = eigh_tridiagonal(np.zeros(two_s + 1), up / 2)
        # eigh returns ascending eigenvalues (-S..S); flip to basis order S..-S
        x_basis = evecs[:, ::-1].copy()
        assert np.allclose(evals[::-1], m, atol=1e-8 * max(1.0, S))
    for a in (m, splus, sx, sy, sz, x_basis):
        a.setflags(write=False)
    return CollectiveOps(S, m, sx, sy, sz, splus, x_basis)


def make_collective_ops(S):
    """Spin matrices for total spin S (2S >= 1), cached per S."""
    two_s = two_s_of(S)
    if two_s < 1:
        raise ValueError("collective operators need 2S >= 1")
    return _ops(two_s)


def _ops_for(state):
    return _ops(state.shape[0] - 1)


def _along_first(vec, state):
    return vec.reshape(vec.shape + (1,) * (state.ndim - 1))


def basis_state(S, m):
    """|S, m> as an amplitude vector."""
    two_s = two_s_of(S)
    idx = two_s / 2 - m
    if abs(idx - round(idx)) > 1e-9 or not 0 <= round(idx) <= two_s:
        raise ValueError(f"m={m} is not a valid projection for S={S}")
    psi = np.zeros(two_s + 1, dtype=complex)
    psi[int(round(idx))] = 1.0
    return psi


def coherent_state(S, theta, phi):
    """Spin coherent state along (theta, phi): exp(-i phi Sz) exp(-i theta Sy)|S, S>."""
    psi = basis_state(S, two_s_of(S) / 2)
    if two_s_of(S) == 0:
        return psi
    psi = rotate(psi, "y", theta)
    return rotate(psi, "z", phi)


def rotate(state, axis, angle):
    """Apply exp(-i angle S_axis) to ``state``."""
    state = np.asarray(state, dtype=complex)
    if angle == 0:
        return state.copy()
    ops = _ops_for(state)
    if axis == "z":
        return _along_first(np.exp(-1j * angle * ops.m), state) * state
    if axis not in ("x", "y"):
        raise ValueError(f"unknown rotation axis {axis!r}")
    v = ops.x_basis
    if axis == "y":
        # Sy = R Sx R^dag with R = exp(-i pi/2 Sz)
        v = np.exp(-0.5j * np.pi * ops.m)[:, None] * v
    phase = _along_first(np.exp(-1j * angle * ops.m), state)
    return v @ (phase * (v.conj().T @ state))


def evolve_twisting(state, strength):
    """Apply exp(-i strength Sx^2), where ``strength`` is chi*t (negative = reversed)."""
    state = np.asarray(state, dtype=complex)
    if strength == 0:
        return state.copy()
    ops = _ops_for(state)
    v = ops.x_basis
    phase = _along_first(np.exp(-1j * strength * ops.m**2), state)
    return v @ (phase * (v.T @ state))


def kicked_top_step(state, k, p):
    """One Floquet period exp(-i k Sx^2 / 2S) exp(-i p Sz): kick first, then twist."""
    state = np.asarray(state, dtype=complex)
    two_s = state.shape[0] - 1
    return evolve_twisting(rotate(state, "z", p), k / two_s)


def kicked_top_step_inverse(state, k, p):
    """Exact inverse of :func:`kicked_top_step` (twist and kick reversed in sign and order)."""
    state = np.asarray(state, dtype=complex)
    two_s = state.shape[0] - 1
    return rotate(evolve_twisting(state, -k / two_s), "z", -p)


def expect(state, op):
    """<state| op |state> for a normalized or sub-normalized 1-D state."""
    return np.vdot(state, op @ state)


def spin_expectations(state):
    """(<Sx>, <Sy>, <Sz>) of a single state, real parts."""
    ops = _ops_for(state)
    return np.array([expect(state, o).real for o in (ops.Sx, ops.Sy, ops.Sz)])
