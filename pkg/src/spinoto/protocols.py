"""Out-of-time-order and time-ordered correlators for collective spin models.

Every correlator is evaluated on explicit state vectors. The interferometric
protocol keeps the control qubit implicit: a :class:`ControlledState` holds
the |0> and |1> branches and the control-qubit readout reduces to the branch
overlap <branch0|branch1> = <X_C> + i<Y_C>.
"""

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Any, Sequence

import numpy as np
from scipy.linalg import expm

from . import spin

UNITARITY_TOL = 1e-10


@dataclass(frozen=True)
class ModelSpec:
    """Collective spin Hamiltonian.

    ``kind`` is ``"twisting"`` (H = chi Sx^2, times are continuous) or
    ``"kicked_top"`` (U = exp(-i k Sx^2/2S) exp(-i p Sz), times are kick counts).
    """

    kind: str
    S: float
    chi: float = 1.0
    k: float = 3.0
    p: float = np.pi / 2

    def __post_init__(self):
        if self.kind not in ("twisting", "kicked_top"):
            raise ValueError(f"unknown model kind {self.kind!r}")
        spin.make_collective_ops(self.S)

    @property
    def dim(self):
        return spin.spin_dim(self.S)

    def _check_time(self, t):
        if t < 0:
            raise ValueError(f"evolution time must be non-negative, got {t}")
        if self.kind == "kicked_top" and int(t) != t:
            raise ValueError(f"kicked-top times are integer kick counts, got {t}")

    def forward(self, state, t):
        """U(t) applied to ``state``."""
        self._check_time(t)
        if self.kind == "twisting":
            return spin.evolve_twisting(state, self.chi * t)
        for _ in range(int(t)):
            state = spin.kicked_top_step(state, self.k, self.p)
        return np.array(state, dtype=complex)

    def backward(self, state, t):
        """U(-t): the sign-reversed Hamiltonian, applied for the same duration."""
        self._check_time(t)
        if self.kind == "twisting":
            return spin.evolve_twisting(state, -self.chi * t)
        for _ in range(int(t)):
            state = spin.kicked_top_step_inverse(state, self.k, self.p)
        return np.array(state, dtype=complex)

    def propagator(self, t):
        """Dense U(t) from scipy's matrix exponential; independent of the fast path."""
        self._check_time(t)
        ops = spin.make_collective_ops(self.S)
        sx2 = ops.Sx @ ops.Sx
        if self.kind == "twisting":
            return expm(-1j * self.chi * t * sx2)
        one = expm(-1j * self.k / (2 * self.S) * sx2) @ expm(-1j * self.p * ops.Sz)
        return np.linalg.matrix_power(one, int(t))


@dataclass(frozen=True)
class Rotation:
    """Global rotation exp(-i angle S_axis)."""

    axis: str = "z"
    angle: float = 0.0

    def apply(self, state):
        return spin.rotate(state, self.axis, self.angle)

    def apply_dagger(self, state):
        return spin.rotate(state, self.axis, -self.angle)

    def matrix(self, S):
        ops = spin.make_collective_ops(S)
        gen = {"x": ops.Sx, "y": ops.Sy, "z": ops.Sz}[self.axis]
        return expm(-1j * self.angle * gen)


class Unitary:
    """An explicit unitary matrix, checked on construction."""

    def __init__(self, matrix):
        matrix = np.asarray(matrix, dtype=complex)
        if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1]:
            raise ValueError("unitary must be a square matrix")
        err = np.abs(matrix.conj().T @ matrix - np.eye(len(matrix))).max()
        if err > UNITARITY_TOL:
            raise ValueError(f"operator is not unitary (max |U^dag U - I| = {err:.2e})")
        self._m = matrix

    def apply(self, state):
        return self._m @ state

    def apply_dagger(self, state):
        return self._m.conj().T @ state

    def matrix(self, S):
        return self._m


IDENTITY = Rotation("z", 0.0)


def as_operator(op):
    if isinstance(op, (Rotation, Unitary)):
        return op
    if op is None:
        return IDENTITY
    return Unitary(op)


@dataclass(frozen=True)
class ProtocolSpec:
    model: ModelSpec
    initial: np.ndarray
    V: Any = IDENTITY
    W: Any = IDENTITY

    def __post_init__(self):
        psi = np.asarray(self.initial, dtype=complex)
        if psi.shape != (self.model.dim,):
            raise ValueError(f"initial state has shape {psi.shape}, expected ({self.model.dim},)")
        object.__setattr__(self, "initial", psi)
        object.__setattr__(self, "V", as_operator(self.V))
        object.__setattr__(self, "W", as_operator(self.W))


@dataclass
class ControlledState:
    """Two system branches tagged by the control qubit; the 1/sqrt(2) is implicit."""

    branch0: np.ndarray
    branch1: np.ndarray

    def control_expectations(self):
        """(<X_C>, <Y_C>) for the state (branch0|0> + branch1|1>)/sqrt(2)."""
        z = np.vdot(self.branch0, self.branch1)
        return z.real, z.imag


@dataclass
class CorrelatorSeries:
    times: np.ndarray
    F: np.ndarray
    G: np.ndarray = None
    metadata: dict = field(default_factory=dict)


def interferometric_state(spec, t):
    """Run gates [1]-[5] and return the two branches V W_t|psi> and W_t V|psi>."""
    m, V, W = spec.model, spec.V, spec.W
    both = np.stack([spec.initial, V.apply(spec.initial)], axis=1)  # [1] controlled V
    both = m.forward(both, t)  # [2]
    both = W.apply(both)  # [3]
    both = m.backward(both, t)  # [4]
    return ControlledState(V.apply(both[:, 0]), both[:, 1])  # [5] anti-controlled V


def interferometric_F(spec, t):
    """F(t) read out from the control qubit, <X_C> + i<Y_C>."""
    x, y = interferometric_state(spec, t).control_expectations()
    return complex(x, y)


def echo_state(spec, t):
    """W_t^dag V^dag W_t V |psi>, built one operator at a time."""
    m, V, W = spec.model, spec.V, spec.W
    psi = V.apply(spec.initial)
    psi = m.backward(W.apply(m.forward(psi, t)), t)
    psi = V.apply_dagger(psi)
    return m.backward(W.apply_dagger(m.forward(psi, t)), t)


def direct_oto_F(spec, t):
    """<psi| W_t^dag V^dag W_t V |psi> by direct application to the state vector."""
    return complex(np.vdot(spec.initial, echo_state(spec, t)))


def distinguishability(spec, t):
    """Overlap of the echoed state with the projector onto the initial state."""
    psi_f = echo_state(spec, t)
    return float(abs(np.vdot(spec.initial, psi_f)) ** 2)


def squared_commutator(spec, t):
    """<|[W_t, V]|^2> from dense Heisenberg-picture matrices (expm based)."""
    S = spec.model.S
    U = spec.model.propagator(t)
    Wt = U.conj().T @ spec.W.matrix(S) @ U
    Vm = spec.V.matrix(S)
    c = (Wt @ Vm - Vm @ Wt) @ spec.initial
    return float(np.vdot(c, c).real)


def time_ordered_G(spec, t):
    """G(t) = <V_t^dag V> with V_t = U(-t) V U(t); forward evolution only."""
    m, V = spec.model, spec.V
    both = m.forward(np.stack([spec.initial, V.apply(spec.initial)], axis=1), t)
    return complex(np.vdot(V.apply(both[:, 0]), both[:, 1]))


def forward_only_time_ordered(model, initial, V_ops, W_ops, times):
    """Time-ordered <(V_n(t_n)...V_1(t_1))^dag (W_n(t_n)...W_1(t_1))> without time reversal.

    Implements the interleaved controlled-gate sequence: W_i acts on the |0>
    branch and V_i on the |1> branch after forward evolution to t_i. With that
    assignment <X_C> = Re G and <Y_C> = -Im G, so the result is <X_C> - i<Y_C>.
    Pad either list with ``None`` (identity) to share a time grid.
    """
    if not (len(V_ops) == len(W_ops) == len(times)):
        raise ValueError("V_ops, W_ops and times must have equal length")
    times = list(times)
    if any(b < a for a, b in zip(times, times[1:])) or (times and times[0] < 0):
        raise ValueError("times must be a non-decreasing sequence starting at t >= 0")
    b0 = np.asarray(initial, dtype=complex)
    b1 = b0.copy()
    now = 0
    for Vi, Wi, ti in zip(V_ops, W_ops, times):
        both = model.forward(np.stack([b0, b1], axis=1), ti - now)
        now = ti
        b0 = as_operator(Wi).apply(both[:, 0])
        b1 = as_operator(Vi).apply(both[:, 1])
    x, y = ControlledState(b0, b1).control_expectations()
    return complex(x, -y)


@dataclass(frozen=True)
class HermitianOTO:
    ratio: float
    probability: float
    numerator: float
    denominator: float


def _as_hermitian(op):
    op = np.asarray(op, dtype=complex)
    if np.abs(op - op.conj().T).max() > UNITARITY_TOL * max(1.0, np.abs(op).max()):
        raise ValueError("operator is not Hermitian")
    return op


def hermitian_oto(model, initial, OV, OW, t, eps=0.1):
    """Normalized Re F for Hermitian O^V, O^W and the flag post-selection probability.

    Returns (<O^V O^W_t O^V O^W_t> + <O^W_t O^V O^W_t O^V>) divided by
    (<O^W_t O^V O^V O^W_t> + <O^V O^W_t O^W_t O^V>), evaluated exactly, and the
    probability eps^3 * denominator / 2 of all three flags firing.
    """
    OV, OW = _as_hermitian(OV), _as_hermitian(OW)
    psi = np.asarray(initial, dtype=complex)

    def OW_t(x):
        return model.backward(OW @ model.forward(x, t), t)

    a = OV @ OW_t(psi)
    b = OW_t(OV @ psi)
    den = float(np.vdot(a, a).real + np.vdot(b, b).real)
    if den <= 0:
        raise ValueError("both post-selected branches vanish; ratio undefined")
    num = 2 * float(np.vdot(a, b).real)
    return HermitianOTO(num / den, eps**3 * den / 2, num, den)


def _point(args):
    fn, spec, t = args
    return fn(spec, t)


def evaluate_series(fn, spec, times, workers=1):
    """Evaluate ``fn(spec, t)`` on every time; results come back in input order."""
    jobs = [(fn, spec, t) for t in times]
    if workers <= 1 or len(jobs) < 2:
        return np.array([_point(j) for j in jobs])
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return np.array(list(pool.map(_point, jobs)))


def kicked_top_series(spec: ProtocolSpec, n_kicks: int) -> CorrelatorSeries:
    """F and G at kicks 0..n_kicks for a kicked-top spec (interferometric F)."""
    if spec.model.kind != "kicked_top":
        raise ValueError("kicked_top_series needs a kicked_top model")
    times = np.arange(n_kicks + 1)
    F = np.array([interferometric_F(spec, int(t)) for t in times])
    G = np.array([time_ordered_G(spec, int(t)) for t in times])
    return CorrelatorSeries(times, F, G, {"model": spec.model})


def fig4_initial_state(S: float, y_sign: int = 1) -> np.ndarray:
    """exp(-i Sy pi/4) exp(-i Sz pi/4) |S_x = S>.

    ``y_sign=-1`` flips the sign of the Sy rotation angle, which moves the
    starting direction from a regular island of the k = 3 map into the
    chaotic sea (see the semiclassics module).
    """
    if y_sign not in (1, -1):
        raise ValueError("y_sign must be +1 or -1")
    psi = spin.coherent_state(S, np.pi / 2, 0.0)
    return spin.rotate(spin.rotate(psi, "z", np.pi / 4), "y", y_sign * np.pi / 4)


def fig4_spec(N: int, k: float = 3.0, y_sign: int = 1) -> ProtocolSpec:
    S = N / 2
    phi = 1 / np.sqrt(N)
    return ProtocolSpec(
        ModelSpec("kicked_top", S, k=k, p=np.pi / 2),
        fig4_initial_state(S, y_sign),
        V=Rotation("z", phi),
        W=Rotation("z", phi),
    )


def fig3_spec(N: int = 50, phi: float = np.pi / 4) -> ProtocolSpec:
    S = N / 2
    return ProtocolSpec(
        ModelSpec("twisting", S, chi=1.0),
        spin.coherent_state(S, np.pi / 2, np.pi / 2),
        V=Rotation("z", phi),
        W=Rotation("z", phi),
    )


def hermitian_series(model, initial, OV, OW, times: Sequence, eps=0.1):
    return [hermitian_oto(model, initial, OV, OW, t, eps) for t in times]
