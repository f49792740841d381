"""Dicke sector plus explicitly tracked spin-1/2 atoms.

Amplitude layout: ``amps[c, a_0, ..., a_{n-1}, b]`` where ``c`` indexes the
Dicke basis of the M = N - n untouched atoms (m = M/2 down to -M/2), ``a_j``
is the state of tracked atom j (0 = up, 1 = down) and ``b`` is the branch
(control-qubit) index. Tracked atom j is atom j of the ensemble; untouched
atoms are n..N-1. With no tracked atoms the layout is (M+1, n_branches), the
same as a batch of Dicke states in :mod:`spinoto.spin`.
"""

from functools import lru_cache

import numpy as np

from .. import spin

HALF = np.array([0.5, -0.5])
# columns are the sx eigenvectors for +1/2 and -1/2; symmetric and self-inverse
X_QUBIT = np.array([[1.0, 1.0], [1.0, -1.0]]) / np.sqrt(2)


@lru_cache(maxsize=256)
def total_m(M, n):
    """m_collective + sum of tracked m_j on the (M+1, 2, ..., 2) grid."""
    out = M / 2 - np.arange(M + 1)
    for _ in range(n):
        out = out[..., None] + HALF
    out.setflags(write=False)
    return out


def _collective_x_basis(M):
    if M == 0:
        return np.ones((1, 1))
    return spin._ops(M).x_basis


class HybridState:
    def __init__(self, n_atoms, amps):
        self.n_atoms = int(n_atoms)
        self.amps = np.asarray(amps, dtype=complex)
        if self.amps.ndim < 2:
            raise ValueError("amps needs a collective axis and a branch axis")
        if self.amps.shape[0] != self.n_untouched + 1:
            raise ValueError("collective axis does not match the untouched atom count")

    @classmethod
    def from_dicke(cls, n_atoms, states):
        """Wrap Dicke-sector amplitudes, shape (N+1,) or (N+1, n_branches)."""
        states = np.asarray(states, dtype=complex)
        if states.ndim == 1:
            states = states[:, None]
        return cls(n_atoms, states.copy())

    def copy(self):
        return HybridState(self.n_atoms, self.amps.copy())

    @property
    def n_tracked(self):
        return self.amps.ndim - 2

    @property
    def n_untouched(self):
        return self.n_atoms - self.n_tracked

    @property
    def n_branches(self):
        return self.amps.shape[-1]

    @property
    def dim(self):
        """Dimension of one branch, (N - n + 1) * 2**n."""
        return (self.n_untouched + 1) * 2**self.n_tracked

    def branch_norms2(self):
        return np.sum(np.abs(self.amps) ** 2, axis=tuple(range(self.amps.ndim - 1)))

    def norm2(self):
        """Mean squared norm over branches (1 for a normalized controlled state)."""
        return float(np.mean(self.branch_norms2()))

    def normalize(self):
        self.amps /= np.sqrt(self.norm2())

    def total_m(self):
        return total_m(self.n_untouched, self.n_tracked)

    def _along(self, arr):
        return arr[..., None]

    # basis changes between Sz (computational) and total-Sx eigenbases
    def to_x_basis(self, amps=None):
        amps = self.amps if amps is None else amps
        v = _collective_x_basis(self.n_untouched)
        shape = amps.shape
        out = (v.T @ amps.reshape(shape[0], -1)).reshape(shape)
        for ax in range(1, 1 + self.n_tracked):
            out = np.moveaxis(np.tensordot(X_QUBIT, out, axes=([1], [ax])), 0, ax)
        return out

    def from_x_basis(self, amps_x):
        v = _collective_x_basis(self.n_untouched)
        out = amps_x
        for ax in range(1, 1 + self.n_tracked):
            out = np.moveaxis(np.tensordot(X_QUBIT, out, axes=([1], [ax])), 0, ax)
        shape = out.shape
        return (v @ out.reshape(shape[0], -1)).reshape(shape)

    def rotate(self, axis, angle, branch=None):
        """exp(-i angle S_axis) on the total spin, on all branches or one."""
        if angle == 0:
            return
        sl = (Ellipsis,) if branch is None else (Ellipsis, slice(branch, branch + 1))
        part = self.amps[sl]
        if self.n_tracked == 0 and axis == "z":
            # same arithmetic as spin.rotate, so the unitary limit is bit-identical
            self.amps[sl] = spin.rotate(part, "z", angle) if part.shape[0] > 1 else part
            return
        phase = self._along(np.exp(-1j * angle * self.total_m()))
        if axis == "z":
            self.amps[sl] = phase * part
        elif axis == "x":
            self.amps[sl] = self.from_x_basis(phase * self.to_x_basis(part))
        elif axis == "y":
            # exp(-i a Sy) = Rz(pi/2) exp(-i a Sx) Rz(-pi/2)
            zq = self._along(np.exp(-0.5j * np.pi * self.total_m()))
            part = zq.conj() * part
            part = self.from_x_basis(phase * self.to_x_basis(part))
            self.amps[sl] = zq * part
        else:
            raise ValueError(f"unknown axis {axis!r}")

    def promote(self):
        """Single out one untouched atom as tracked atom n (dimension doubles)."""
        M = self.n_untouched
        if M == 0:
            raise ValueError("no untouched atoms left")
        c = np.arange(M + 1)
        shape = (M, 2) + self.amps.shape[1:]
        new = np.zeros(shape, dtype=complex)
        extra = (None,) * (self.amps.ndim - 1)
        # |M/2, m> = sqrt(k/M)|D_{M-1}^{k-1}>|up> + sqrt((M-k)/M)|D_{M-1}^{k}>|down>, k = M - c ups
        new[:, 0] = np.sqrt((M - c[:-1]) / M)[(slice(None),) + extra] * self.amps[:-1]
        new[:, 1] = np.sqrt(c[1:] / M)[(slice(None),) + extra] * self.amps[1:]
        # move the new atom axis behind the existing tracked axes
        self.amps = np.moveaxis(new, 1, self.n_tracked + 1)
        return self.n_tracked - 1

    def apply_single(self, atom, matrix):
        """Apply a 2x2 matrix to tracked atom ``atom`` on every branch."""
        if not 0 <= atom < self.n_tracked:
            raise ValueError(f"atom {atom} is not tracked")
        ax = atom + 1
        self.amps = np.moveaxis(np.tensordot(matrix, self.amps, axes=([1], [ax])), 0, ax)

    def atom_populations(self, atom):
        """(p_up, p_down) of a tracked atom, summed over branches."""
        p = np.abs(self.amps) ** 2
        ax = atom + 1
        other = tuple(i for i in range(p.ndim) if i != ax)
        return p.sum(axis=other)

    def apply_sx(self):
        """Total Sx on every branch."""
        self.amps = self.from_x_basis(self._along(self.total_m()) * self.to_x_basis())

    def to_full(self):
        """Branch amplitudes in the full 2^N space, shape (2,)*N + (n_branches,).

        Atom i is axis i with 0 = up. Intended for small-N checks only.
        """
        M, n = self.n_untouched, self.n_tracked
        dicke = dicke_embedding(M)  # (M+1, 2, ..., 2)
        full = np.tensordot(self.amps, dicke, axes=([0], [0]))
        # full axes: tracked (n), branch, untouched (M) -> tracked, untouched, branch
        return np.moveaxis(full, n, -1)


@lru_cache(maxsize=32)
def dicke_embedding(M):
    """Dicke states |M/2, m> written out in the 2^M product basis, shape (M+1, 2,...,2)."""
    out = np.zeros((M + 1,) + (2,) * M)
    if M == 0:
        out[0] = 1.0
        out.setflags(write=False)
        return out
    bits = np.indices((2,) * M).reshape(M, -1).T  # rows of 0/1, 1 = down
    downs = bits.sum(axis=1)
    flat = out.reshape(M + 1, -1)
    for c in range(M + 1):
        sel = downs == c
        flat[c, sel] = 1 / np.sqrt(sel.sum())
    out.setflags(write=False)
    return out


def full_space_ops(N):
    """Dense total Sx, Sy, Sz on the 2^N product space (atom 0 most significant, 0 = up)."""
    sx = np.array([[0, 0.5], [0.5, 0]], dtype=complex)
    sy = np.array([[0, -0.5j], [0.5j, 0]], dtype=complex)
    sz = np.diag([0.5, -0.5]).astype(complex)
    out = []
    for s in (sx, sy, sz):
        tot = np.zeros((2**N, 2**N), dtype=complex)
        for i in range(N):
            tot += single_atom_op(N, i, s)
        out.append(tot)
    return tuple(out)


def single_atom_op(N, i, op):
    return np.kron(np.kron(np.eye(2**i), op), np.eye(2 ** (N - i - 1)))
