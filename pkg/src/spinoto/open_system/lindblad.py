"""Exact Lindblad evolution of the two-branch interferometer for small N.

The control qubit is carried as density-matrix blocks rho_ab (a, b = branch).
Every block obeys the same master equation because jumps act on the system
only. Work is done in the total-Sx eigenbasis, where the Hamiltonian and the
cavity dissipator act elementwise; the single-atom jump terms are integrated
with a fixed-step integrating-factor RK4, checked by step halving.
"""

from dataclasses import dataclass
from functools import reduce

import numpy as np

from .. import spin
from .hybrid import X_QUBIT, dicke_embedding, full_space_ops
from .rates import SINGLE_ATOM

MAX_ATOMS = 8


@dataclass
class _Space:
    n_atoms: int
    P: np.ndarray  # columns: total-Sx eigenvectors in the computational basis
    mx: np.ndarray  # matching eigenvalues
    Sz: np.ndarray
    Sy: np.ndarray
    Sx: np.ndarray
    local: bool  # whether single-atom jump operators act in this space
    embed: np.ndarray  # Dicke state (N+1) -> this space

    @property
    def dim(self):
        return len(self.mx)


def full_space(N):
    if N > MAX_ATOMS:
        raise ValueError(f"master-equation oracle is limited to N <= {MAX_ATOMS}")
    P = reduce(np.kron, [X_QUBIT] * N)
    bits = np.indices((2,) * N).reshape(N, -1).T
    mx = (0.5 - bits).sum(axis=1)
    Sx, Sy, Sz = full_space_ops(N)
    embed = dicke_embedding(N).reshape(N + 1, -1).T
    return _Space(N, P, mx.astype(float), Sz, Sy, Sx, True, embed)


def dicke_space(N):
    ops = spin.make_collective_ops(N / 2)
    return _Space(N, np.asarray(ops.x_basis), ops.m.copy(), ops.Sz.astype(complex),
                  ops.Sy, ops.Sx.astype(complex), False, np.eye(N + 1))


def _local_dissipator(Y, N, mats):
    """sum_i sum_A A_i Y A_i^dag for 2x2 matrices ``mats`` on every atom (x basis)."""
    B = Y.shape[0]
    T = Y.reshape((B,) + (2,) * (2 * N))
    out = np.zeros_like(T)
    for i in range(N):
        r, c = 1 + i, 1 + N + i
        for A in mats:
            X = np.moveaxis(np.tensordot(A, T, axes=([1], [r])), 0, r)
            X = np.moveaxis(np.tensordot(A.conj(), X, axes=([1], [c])), 0, c)
            out += X
    return out.reshape(Y.shape)


class LindbladSolver:
    """Fixed-step solver for rho' = -i[H, rho] + sum_L (L rho L^dag - {L^dag L, rho}/2)."""

    def __init__(self, space, params, steps_per_unit=50):
        self.space = space
        self.params = params
        self.steps_per_unit = steps_per_unit
        mx = space.mx
        self.m2_diff = mx[:, None] ** 2 - mx[None, :] ** 2
        self.m_gap2 = (mx[:, None] - mx[None, :]) ** 2
        # single-atom jump matrices rotated into the sx eigenbasis
        self.local_mats = [np.sqrt(params.mu) * X_QUBIT @ SINGLE_ATOM[ch] @ X_QUBIT
                           for ch in SINGLE_ATOM] if (space.local and params.mu > 0) else []

    def to_x(self, op):
        P = self.space.P
        return P.conj().T @ op @ P

    def _J(self, Y):
        if not self.local_mats:
            return np.zeros_like(Y)
        return _local_dissipator(Y, self.space.n_atoms, self.local_mats)

    def twist(self, Y, strength):
        """Evolve blocks Y (shape (B, D, D), x basis) under +-chi Sx^2 for |strength|/chi."""
        p = self.params
        duration = abs(strength) / p.chi
        if duration == 0:
            return Y
        sign = np.sign(strength)
        const = -2 * p.mu * self.space.n_atoms if self.space.local else 0.0
        lam = -1j * sign * p.chi * self.m2_diff - 0.5 * p.gamma * self.m_gap2 + const
        n = max(1, int(np.ceil(duration * self.steps_per_unit)))
        h = duration / n
        E1, E2 = np.exp(lam * h), np.exp(lam * h / 2)
        if not self.local_mats:
            return Y * np.exp(lam * duration)
        for _ in range(n):
            k1 = self._J(Y)
            yh = E2 * Y
            K2 = self._J(yh + h / 2 * E2 * k1)
            K3 = self._J(yh + h / 2 * K2)
            K4 = self._J(E1 * Y + h * E2 * K3)
            Y = E1 * Y + h / 6 * (E1 * k1 + 2 * E2 * K2 + 2 * E2 * K3 + K4)
        return Y

    def conjugate(self, Y, U_x, left=True, right=True):
        if left:
            Y = U_x @ Y
        if right:
            Y = Y @ U_x.conj().T
        return Y


def _rotation_full(space, rot):
    from scipy.linalg import expm

    gen = {"x": space.Sx, "y": space.Sy, "z": space.Sz}[rot.axis]
    return expm(-1j * rot.angle * gen)


def _series(spec, params, times, space, steps_per_unit):
    model, V, W = spec.model, spec.V, spec.W
    solver = LindbladSolver(space, params, steps_per_unit)
    Vx = solver.to_x(_rotation_full(space, V))
    Wx = solver.to_x(_rotation_full(space, W))
    Kx = solver.to_x(_rotation_full(space, type(V)("z", model.p))) if model.kind == "kicked_top" else None

    psi = space.P.conj().T @ (space.embed @ spec.initial)
    b0, b1 = psi, Vx @ psi
    # blocks rho_00, rho_11, rho_10 (rho_01 = rho_10^dag), each with the 1/2
    Y = 0.5 * np.stack([np.outer(b0, b0.conj()), np.outer(b1, b1.conj()), np.outer(b1, b0.conj())])

    def evolve(Y, t_from, t_to, sign):
        if model.kind == "kicked_top":
            for _ in range(int(round(t_to - t_from))):
                if sign > 0:
                    Y = solver.conjugate(Y, Kx)
                    Y = solver.twist(Y, model.k / (2 * model.S))
                else:
                    Y = solver.twist(Y, -model.k / (2 * model.S))
                    Y = solver.conjugate(Y, Kx.conj().T)
            return Y
        return solver.twist(Y, sign * model.chi * (t_to - t_from))

    F, G, trace = [], [], []
    now = 0
    for t in times:
        Y = evolve(Y, now, t, +1)
        now = t
        G.append(2 * np.trace(Y[2] @ Vx.conj().T))
        E = solver.conjugate(Y, Wx)
        E = evolve(E, 0, t, -1)
        F.append(2 * np.trace(E[2] @ Vx.conj().T))
        trace.append(np.trace(E[0] + E[1]).real)
        trace.append(np.trace(Y[0] + Y[1]).real)
    return np.array(F), np.array(G), np.array(trace)


@dataclass
class OracleResult:
    times: np.ndarray
    F: np.ndarray
    G: np.ndarray
    trace: np.ndarray
    steps_per_unit: int
    halving_change: float


def master_equation_oracle(spec, params, times, tol=1e-8, steps_per_unit=50, dicke_only=False,
                           max_doublings=6):
    """Exact F and G series for N <= 8 atoms, converged by step halving.

    With ``dicke_only=True`` the solve is restricted to the symmetric sector
    and spontaneous emission is ignored (valid for mu = 0 only).
    """
    N = int(round(2 * spec.model.S))
    if N > MAX_ATOMS:
        raise ValueError(f"master-equation oracle is limited to N <= {MAX_ATOMS}, got {N}")
    space = dicke_space(N) if dicke_only else full_space(N)
    if dicke_only and params.mu > 0:
        raise ValueError("the Dicke-sector solve cannot represent spontaneous emission")
    times = list(times)
    coarse = _series(spec, params, times, space, steps_per_unit)
    for _ in range(max_doublings):
        steps_per_unit *= 2
        fine = _series(spec, params, times, space, steps_per_unit)
        change = max(np.abs(fine[0] - coarse[0]).max(), np.abs(fine[1] - coarse[1]).max())
        if change < tol:
            return OracleResult(np.asarray(times), fine[0], fine[1], fine[2], steps_per_unit, float(change))
        coarse = fine
    raise RuntimeError(f"step halving did not converge below {tol} (last change {change:.2e})")
