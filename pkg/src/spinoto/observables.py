"""Spin Wigner function on the sphere and correlator decay times."""

from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.linalg import eigh_tridiagonal
from scipy.special import sph_harm_y

from . import spin

MAX_DIM = 201


@dataclass
class WignerGrid:
    """W(theta_i, phi_j) on a Gauss-Legendre (cos theta) x uniform (phi) grid.

    Normalization: W = sum_kq rho_kq Y_kq with rho_kq = tr(rho T_kq^dag) and
    Hilbert-Schmidt normalized multipole operators, so the sphere integral of
    W is tr(rho) * sqrt(4 pi / (2S + 1)).
    """

    S: float
    theta: np.ndarray
    phi: np.ndarray
    values: np.ndarray
    weights: np.ndarray  # solid-angle weights, same shape as values

    @property
    def n_theta(self):
        return len(self.theta)

    @property
    def n_phi(self):
        return len(self.phi)

    def integral(self):
        return float(np.sum(self.weights * self.values))

    def argmax(self):
        i, j = np.unravel_index(np.argmax(self.values), self.values.shape)
        return float(self.theta[i]), float(self.phi[j])


def norm_constant(S):
    """Sphere integral of W for a unit-trace state."""
    return float(np.sqrt(4 * np.pi / (2 * S + 1)))


def _multipole_diagonals(S):
    """Cached list of the multipole diagonals, see :func:`_build_diagonals`."""
    return _cached_diagonals(spin.two_s_of(S))


@lru_cache(maxsize=8)
def _cached_diagonals(two_s):
    out = []
    for k, q, rows, cols, v in _build_diagonals(two_s / 2):
        for a in (rows, cols, v):
            a.setflags(write=False)
        out.append((k, q, rows, cols, v))
    return tuple(out)


def _build_diagonals(S):
    """Yield (k, q, rows, cols, values) for the nonzero diagonal of each T_kq.

    For fixed q the T_kq (k = |q|..2S) are the eigenvectors of the adjoint
    Casimir sum_a [S_a, [S_a, .]] (eigenvalue k(k+1)) restricted to the q-th
    diagonal, a symmetric tridiagonal problem. Signs follow T_kk ~ (-1)^k S+^k
    and one lowering step [S-, T_kq] ~ +T_k,q-1 from the previous diagonal,
    so no rounding error is propagated along the ladder.
    """
    ops = spin.make_collective_ops(S)
    dim = ops.dim
    m = ops.m
    s1 = S * (S + 1)
    a_plus = np.sqrt(np.maximum(s1 - m * (m + 1), 0.0))  # <m+1|S+|m>
    # S-[r+1, r] = <m_r - 1|S-|m_r> = a_plus[r + 1]
    prev = {}
    for q in range(dim - 1, -dim, -1):
        L = dim - abs(q)
        j = np.arange(L)
        rows = j + max(-q, 0)
        cols = j + max(q, 0)
        mr, mc = m[rows], m[cols]
        d = 2 * s1 - 2 * mr * mc
        e = -(a_plus[rows[1:]] * a_plus[cols[1:]])
        if L > 1:
            _, vecs = eigh_tridiagonal(d, e)
        else:
            vecs = np.ones((1, 1))
        cur = {}
        for idx, k in enumerate(range(abs(q), dim)):
            v = vecs[:, idx]
            if k == q:
                big = np.argmax(np.abs(v))
                sign = (-1) ** k * np.sign(v[big])
            else:
                Tp = prev[k]  # T_k,q+1 as (rows, cols, values)
                low = _lowered(Tp, a_plus, dim)
                sign = np.sign(low[rows, cols] @ v)
            v = sign * v
            cur[k] = (rows, cols, v)
            yield k, q, rows, cols, v
        prev = cur


def _lowered(T, a_plus, dim):
    """[S-, X] as a dense matrix for X given by its diagonal (rows, cols, values)."""
    rows, cols, v = T
    out = np.zeros((dim, dim))
    ok = rows + 1 < dim
    np.add.at(out, (rows[ok] + 1, cols[ok]), a_plus[rows[ok] + 1] * v[ok])
    ok = cols >= 1
    np.add.at(out, (rows[ok], cols[ok] - 1), -a_plus[cols[ok]] * v[ok])
    return out


def multipole_operators(S):
    """Yield (k, q, T_kq) for the Hilbert-Schmidt normalized spherical tensor operators."""
    dim = spin.spin_dim(S)
    for k, q, rows, cols, v in _multipole_diagonals(S):
        T = np.zeros((dim, dim))
        T[rows, cols] = v
        yield k, q, T


def multipole_moments(rho):
    """rho_kq = tr(rho T_kq^dag) as a dict {(k, q): complex}."""
    rho = np.asarray(rho)
    S = (rho.shape[0] - 1) / 2
    return {(k, q): complex(v @ rho[rows, cols]) for k, q, rows, cols, v in _multipole_diagonals(S)}


def _density(state):
    state = np.asarray(state, dtype=complex)
    if state.ndim == 1:
        return np.outer(state, state.conj())
    return state


def wigner(state, n_theta=None, n_phi=None, phi_offset=0.0):
    """Wigner function of a Dicke-basis state vector or density matrix.

    Defaults: n_theta = 2S + 2 Gauss-Legendre nodes and n_phi = 4S + 4
    uniform points starting at ``phi_offset``; both integrate every multipole
    exactly.
    """
    rho = _density(state)
    dim = rho.shape[0]
    if dim > MAX_DIM:
        raise ValueError(f"wigner supports 2S+1 <= {MAX_DIM}, got {dim}")
    S = (dim - 1) / 2
    n_theta = dim + 1 if n_theta is None else int(n_theta)
    n_phi = 2 * dim + 2 if n_phi is None else int(n_phi)
    x, w = np.polynomial.legendre.leggauss(n_theta)
    theta = np.arccos(x[::-1])  # increasing theta from the north pole
    w = w[::-1]
    phi = phi_offset + 2 * np.pi * np.arange(n_phi) / n_phi
    # A_q(theta) = sum_k rho_kq Y_kq(theta, 0), then W = sum_q A_q e^{i q phi}
    A = {}
    for k, q, rows, cols, v in _multipole_diagonals(S):
        r = v @ rho[rows, cols]
        if r == 0:
            continue
        A[q] = A.get(q, 0) + r * sph_harm_y(k, q, theta, 0.0)
    W = np.zeros((n_theta, n_phi), dtype=complex)
    for q, a in A.items():
        W += np.outer(a, np.exp(1j * q * phi))
    weights = np.outer(w, np.full(n_phi, 2 * np.pi / n_phi))
    return WignerGrid(S, theta, phi, W.real, weights)


@dataclass(frozen=True)
class DecayTime:
    threshold: float
    t_cross: float = None  # None when the series never drops below threshold

    @property
    def crossed(self):
        return self.t_cross is not None


def decay_time(times, values, threshold=0.5):
    """First time |values| drops below ``threshold``, linearly interpolated.

    No extrapolation: a series that stays at or above the threshold gives
    ``DecayTime(threshold, None)``.
    """
    times = np.asarray(times, dtype=float)
    mag = np.abs(np.asarray(values))
    if len(times) == 0 or len(times) != len(mag):
        raise ValueError("need a non-empty series with matching times")
    below = np.nonzero(mag < threshold)[0]
    if len(below) == 0:
        return DecayTime(threshold, None)
    i = below[0]
    if i == 0:
        return DecayTime(threshold, float(times[0]))
    t0, t1, a0, a1 = times[i - 1], times[i], mag[i - 1], mag[i]
    return DecayTime(threshold, float(t0 + (a0 - threshold) / (a0 - a1) * (t1 - t0)))


def series_decay_times(series, threshold=0.5):
    """(F, G) decay times of a CorrelatorSeries."""
    return (decay_time(series.times, series.F, threshold),
            decay_time(series.times, series.G, threshold))
