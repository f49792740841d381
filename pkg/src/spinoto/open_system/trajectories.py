"""Monte Carlo wavefunction unraveling of the dissipative interferometer.

Between jumps the state evolves under H - (i/2) sum L^dag L. For the cavity
model every L^dag L is either proportional to Sx^2 (cavity) or sums to the
constant 2 mu N (spontaneous emission), so the no-jump propagator of a
twisting segment is diagonal in the total-Sx eigenbasis and is applied
exactly. Kicks and the V, W rotations are instantaneous and dissipation-free.
"""

import json
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq

from .hybrid import HybridState
from .rates import SINGLE_ATOM, DissipationParams

NORM_FLOOR = 1e-14


class NormUnderflowError(FloatingPointError):
    pass


def trajectory_rng(master_seed, *key):
    """Counter-based stream for one trajectory (or one echo of a trajectory)."""
    seq = np.random.SeedSequence(entropy=int(master_seed), spawn_key=tuple(int(k) for k in key))
    return np.random.Generator(np.random.Philox(seq))


@dataclass
class Jump:
    time: float
    channel: str
    atom: int = None


class Trajectory:
    """One stochastic run of a (possibly multi-branch) hybrid state.

    ``time`` is physical time, advanced only by twisting segments.
    """

    def __init__(self, state, params, rng, time=0.0):
        self.state = state
        self.params = params
        self.rng = rng
        self.time = time
        self.jumps = []
        self.n_spontaneous = 0
        self.overflowed = False
        self.threshold = self._draw()

    def fork(self, rng):
        """Copy at the current time with a fresh stream; the copy starts renormalized."""
        other = Trajectory.__new__(Trajectory)
        other.state = self.state.copy()
        other.params = self.params
        other.rng = rng
        other.time = self.time
        other.jumps = []
        other.n_spontaneous = self.n_spontaneous
        other.overflowed = self.overflowed
        if self.dissipative:
            other.state.normalize()
        other.threshold = other._draw()
        return other

    @property
    def dissipative(self):
        return not self.overflowed and not self.params.is_unitary

    def _draw(self):
        if self.params.is_unitary:
            return 0.0
        return float(self.rng.random())

    # -- coherent pieces -------------------------------------------------
    def rotate(self, axis, angle, branch=None):
        self.state.rotate(axis, angle, branch)

    def twist(self, strength):
        """exp(-i strength Sx^2) with dissipation over duration |strength| / chi."""
        if strength == 0:
            return
        st = self.state
        ax = st.to_x_basis()
        m2 = st.total_m()[..., None] ** 2
        if not self.dissipative:
            phase = np.exp(-1j * strength * m2)
            st.amps = st.from_x_basis(phase * ax)
            return
        sign = np.sign(strength)
        remaining = abs(strength) / self.params.chi
        while remaining > 0:
            if not self.dissipative:
                st.amps = st.from_x_basis(np.exp(-1j * sign * self.params.chi * remaining * m2) * ax)
                return
            gamma, mu, N = self.params.gamma, self.params.mu, st.n_atoms
            weights = np.abs(ax) ** 2
            m2_flat = np.broadcast_to(m2, ax.shape)

            def log_norm2(s):
                return np.log(np.mean(np.sum(weights * np.exp(-gamma * s * m2_flat),
                                             axis=tuple(range(ax.ndim - 1))))) - 2 * mu * N * s

            end = log_norm2(remaining)
            log_u = np.log(self.threshold)
            if end >= log_u:
                s = remaining
            else:
                s = brentq(lambda x: log_norm2(x) - log_u, 0.0, remaining, xtol=1e-14, rtol=1e-14)
            theta = sign * self.params.chi * s
            factor = np.exp(-1j * theta * m2) * np.exp(-0.5 * gamma * s * m2 - mu * N * s)
            ax = factor * ax
            self.time += s
            remaining -= s
            if end >= log_u:
                st.amps = st.from_x_basis(ax)
                return
            ax = self._jump(ax)
            if st.norm2() < NORM_FLOOR:
                raise NormUnderflowError("trajectory norm fell below 1e-14")
            m2 = st.total_m()[..., None] ** 2
        st.amps = st.from_x_basis(ax)

    # -- jumps -----------------------------------------------------------
    def _jump(self, ax):
        """Sample and apply one jump; takes and returns total-Sx-basis amplitudes."""
        st, p = self.state, self.params
        m = st.total_m()[..., None]
        rate_cav = p.gamma * np.sum(np.abs(ax) ** 2 * m**2)
        rate_sp = 2 * p.mu * st.n_atoms * np.sum(np.abs(ax) ** 2)
        if self.rng.random() * (rate_cav + rate_sp) < rate_cav:
            ax = ax * m
            self.jumps.append(Jump(self.time, "cavity"))
            st.amps = st.from_x_basis(ax)
        else:
            st.amps = st.from_x_basis(ax)
            if self.n_spontaneous >= p.photon_budget:
                self.overflowed = True
            else:
                self._spontaneous()
                self.n_spontaneous += 1
                if self.n_spontaneous >= p.photon_budget:
                    self.overflowed = True
        st.normalize()
        self.threshold = self._draw()
        return st.to_x_basis()

    def _spontaneous(self):
        st = self.state
        pick = self.rng.random() * st.n_atoms
        if pick < st.n_untouched:
            atom = st.promote()
        else:
            atom = min(int(pick - st.n_untouched), st.n_tracked - 1)
        p_up, p_down = st.atom_populations(atom)
        weights = np.array([p_down, p_up, p_up, p_down])  # flip_up, flip_down, proj_up, proj_down
        channel = ("sp_flip_up", "sp_flip_down", "sp_proj_up", "sp_proj_down")[
            int(np.searchsorted(np.cumsum(weights), self.rng.random() * weights.sum(), side="right"))
            if weights.sum() > 0 else 0
        ]
        st.apply_single(atom, SINGLE_ATOM[channel])
        self.jumps.append(Jump(self.time, channel, atom))

    def force_spontaneous(self, channel, atom=None):
        """Apply a chosen single-atom jump now (promoting an untouched atom if needed)."""
        st = self.state
        if atom is None or atom >= st.n_tracked:
            atom = st.promote()
        st.apply_single(atom, SINGLE_ATOM[channel])
        st.normalize()
        self.jumps.append(Jump(self.time, channel, atom))
        self.n_spontaneous += 1

    def force_cavity(self):
        self.state.apply_sx()
        self.state.normalize()
        self.jumps.append(Jump(self.time, "cavity"))

    # -- readout ---------------------------------------------------------
    def overlap(self, V=None):
        """<V b0 | b1> divided by the mean branch norm (the control-qubit X + iY)."""
        a = self.state.amps
        b0, b1 = a[..., 0], a[..., 1]
        if V is not None:
            b0 = b0.copy()[..., None]
            tmp = HybridState(self.state.n_atoms, b0)
            tmp.rotate(V.axis, V.angle)
            b0 = tmp.amps[..., 0]
        z = np.vdot(b0, b1)
        if self.params.is_unitary:
            return complex(z)
        return complex(z / self.state.norm2())


def trajectory_step(traj, model, direction=+1):
    """Advance ``traj`` by one kick (kicked top) of the model, forward or reversed."""
    two_s = 2 * model.S
    if direction > 0:
        traj.rotate("z", model.p)
        traj.twist(model.k / two_s)
    else:
        traj.twist(-model.k / two_s)
        traj.rotate("z", -model.p)
    return traj


def _evolve(traj, model, t_from, t_to, direction):
    if model.kind == "kicked_top":
        for _ in range(int(round(t_to - t_from))):
            trajectory_step(traj, model, direction)
    else:
        traj.twist(direction * model.chi * (t_to - t_from))


@dataclass
class TrajectoryRecord:
    seed: tuple
    jumps: list
    echo_jumps: dict
    overflowed: bool
    overflow_F: np.ndarray
    overflow_G: np.ndarray
    F: np.ndarray
    G: np.ndarray

    def to_json(self):
        return json.dumps({
            "seed": list(self.seed),
            "jumps": [[j.time, j.channel, j.atom] for j in self.jumps],
            "echo_jumps": {str(t): [[j.time, j.channel, j.atom] for j in js]
                           for t, js in self.echo_jumps.items()},
            "overflowed": bool(self.overflowed),
        }, sort_keys=True)


def run_trajectory(spec, params, times, master_seed, index):
    """One trajectory: shared forward run for G, one forked echo per time point for F."""
    model, V, W = spec.model, spec.V, spec.W
    N = int(round(2 * model.S))
    start = np.stack([spec.initial, spec.initial], axis=1)
    start[:, 1] = V.apply(spec.initial)  # [1] controlled V on branch 1
    fwd = Trajectory(HybridState.from_dicke(N, start), params, trajectory_rng(master_seed, index, 0))
    F = np.empty(len(times), dtype=complex)
    G = np.empty(len(times), dtype=complex)
    ovF = np.zeros(len(times), dtype=bool)
    ovG = np.zeros(len(times), dtype=bool)
    echo_jumps = {}
    now = 0
    for i, t in enumerate(times):
        _evolve(fwd, model, now, t, +1)
        now = t
        # G = <V b0 | b1>: the branches are U psi and U V psi
        G[i] = fwd.overlap(V)
        ovG[i] = fwd.overflowed
        echo = fwd.fork(trajectory_rng(master_seed, index, i + 1))
        echo.rotate(W.axis, W.angle)  # [3]
        _evolve(echo, model, 0, t, -1)  # [4]
        F[i] = echo.overlap(V)  # [5] anti-controlled V, then read out
        ovF[i] = echo.overflowed
        echo_jumps[i] = echo.jumps
    return TrajectoryRecord((int(master_seed), int(index)), fwd.jumps, echo_jumps,
                            bool(ovF.any() or ovG.any()), ovF, ovG, F, G)


@dataclass
class EnsembleEstimate:
    mean: np.ndarray
    stderr_re: np.ndarray
    stderr_im: np.ndarray
    n_traj: int
    overflow_fraction: float
    overflow_by_time: np.ndarray = field(default=None)

    @property
    def stderr(self):
        """Combined standard error of the complex mean (both quadratures)."""
        return np.hypot(self.stderr_re, self.stderr_im)

    @property
    def abs_stderr(self):
        """Standard error of |mean| by first-order propagation."""
        mag = np.abs(self.mean)
        safe = np.where(mag > 0, mag, 1.0)
        g = np.hypot(self.mean.real * self.stderr_re, self.mean.imag * self.stderr_im) / safe
        return np.where(mag > 0, g, self.stderr)


def _estimate(samples, overflow):
    samples = np.asarray(samples)
    n = samples.shape[0]
    ddof = 1 if n > 1 else 0
    se_re = samples.real.std(axis=0, ddof=ddof) / np.sqrt(n)
    se_im = samples.imag.std(axis=0, ddof=ddof) / np.sqrt(n)
    by_time = np.asarray(overflow).mean(axis=0)
    return EnsembleEstimate(samples.mean(axis=0), se_re, se_im, n, float(by_time.max(initial=0.0)), by_time)


def _run_one(args):
    return run_trajectory(*args)


@dataclass
class DissipativeResult:
    times: np.ndarray
    F: EnsembleEstimate
    G: EnsembleEstimate
    records: list


def dissipative_correlators(spec, params, times, n_traj, master_seed, workers=1):
    """Trajectory-averaged F and G; identical for any worker count.

    Reduction is in trajectory-index order; ``overflow_fraction`` is the
    largest fraction, over time points, of runs that exceeded the photon budget.
    """
    if n_traj < 1:
        raise ValueError("n_traj must be >= 1")
    if not isinstance(params, DissipationParams):
        raise TypeError("params must be DissipationParams")
    for op in (spec.V, spec.W):
        if not hasattr(op, "axis"):
            raise ValueError("dissipative runs support rotation V and W only")
    times = list(times)
    jobs = [(spec, params, times, master_seed, i) for i in range(n_traj)]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            records = list(pool.map(_run_one, jobs, chunksize=max(1, n_traj // (4 * workers))))
    else:
        records = [_run_one(j) for j in jobs]
    F = _estimate([r.F for r in records], [r.overflow_F for r in records])
    G = _estimate([r.G for r in records], [r.overflow_G for r in records])
    return DissipativeResult(np.asarray(times), F, G, records)


def write_trajectory_log(records, path):
    """One JSON object per line: seed, jumps, echo jumps, overflow flag."""
    with open(path, "w") as fh:
        for r in records:
            fh.write(r.to_json() + "\n")


def read_trajectory_log(path):
    with open(path) as fh:
        return [json.loads(line) for line in fh if line.strip()]


def unitary_reference(spec, times):
    """Unitary F and G on the same grid, for comparison with a dissipative run."""
    from ..protocols import interferometric_F, time_ordered_G

    F = np.array([interferometric_F(spec, t) for t in times])
    G = np.array([time_ordered_G(spec, t) for t in times])
    return F, G

