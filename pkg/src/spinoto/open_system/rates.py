"""Dissipation rates and jump-operator bookkeeping for the cavity implementation."""

from dataclasses import dataclass
from math import comb

import numpy as np

CHANNELS = ("cavity", "sp_flip_up", "sp_flip_down", "sp_proj_up", "sp_proj_down")
SPONTANEOUS = CHANNELS[1:]

# single-atom jump matrices in the (up, down) basis, without the sqrt(mu)
SINGLE_ATOM = {
    "sp_flip_up": np.array([[0, 1], [0, 0]], dtype=complex),  # |up><down|
    "sp_flip_down": np.array([[0, 0], [1, 0]], dtype=complex),  # |down><up|
    "sp_proj_up": np.array([[1, 0], [0, 0]], dtype=complex),
    "sp_proj_down": np.array([[0, 0], [0, 1]], dtype=complex),
}


@dataclass(frozen=True)
class DissipationParams:
    """Effective rates of the adiabatically eliminated cavity model.

    ``eta`` is the single-atom cooperativity and ``d = 2 delta / kappa`` the
    two-photon detuning parameter. Use :meth:`from_rates` to set gamma and
    mu directly, e.g. to switch one channel off.
    """

    chi: float = 1.0
    eta: float = 100.0
    d: float = 20.0
    photon_budget: int = 5
    _gamma: float = None
    _mu: float = None

    def __post_init__(self):
        if self.photon_budget < 0:
            raise ValueError("photon_budget must be >= 0")
        if self.gamma < 0 or self.mu < 0:
            raise ValueError("rates must be non-negative")

    @classmethod
    def from_rates(cls, gamma, mu, chi=1.0, photon_budget=5):
        """Bypass the cavity parametrization and set gamma, mu directly."""
        return cls(chi=chi, eta=np.nan, d=np.nan, photon_budget=photon_budget, _gamma=gamma, _mu=mu)

    @classmethod
    def unitary(cls, chi=1.0):
        return cls.from_rates(0.0, 0.0, chi=chi)

    @property
    def gamma(self):
        """Cavity loss rate per atom, 2 chi / d."""
        if self._gamma is not None:
            return self._gamma
        return 2 * self.chi / self.d

    @property
    def mu(self):
        """Half the spontaneous scattering rate per atom, chi d / (4 eta)."""
        if self._mu is not None:
            return self._mu
        return self.chi * self.d / (4 * self.eta)

    @property
    def is_unitary(self):
        return self.gamma == 0 and self.mu == 0


@dataclass(frozen=True)
class JumpOperator:
    """A symbolic jump operator: collective (atom is None) or acting on one atom."""

    channel: str
    rate: float
    atom: int = None

    def matrix(self):
        """Single-atom 2x2 matrix including sqrt(rate); cavity has no fixed matrix."""
        if self.channel == "cavity":
            raise ValueError("the cavity operator is sqrt(gamma) Sx on the collective spin")
        return np.sqrt(self.rate) * SINGLE_ATOM[self.channel]


def jump_operators(N, params):
    """sqrt(gamma) Sx plus the 4N single-atom operators at rate mu (zero rates omitted)."""
    if N < 1:
        raise ValueError("need at least one atom")
    ops = []
    if params.gamma > 0:
        ops.append(JumpOperator("cavity", params.gamma))
    if params.mu > 0:
        for i in range(N):
            ops.extend(JumpOperator(ch, params.mu, i) for ch in SPONTANEOUS)
    return ops


def dicke_multiplicity(N, S):
    """Number of spin-S irreps in the N-fold tensor power of spin 1/2."""
    j = N / 2 - S
    if abs(j - round(j)) > 1e-9 or j < 0:
        return 0
    j = int(round(j))
    return comb(N, j) - (comb(N, j - 1) if j >= 1 else 0)


def twist_strength(model, t):
    """Total chi*t accumulated by U(t): k t / 2S for the kicked top, chi t for twisting."""
    if model.kind == "kicked_top":
        return t * model.k / (2 * model.S)
    return model.chi * t


def photons_lost(model, params, t, protocol="F"):
    """Mean photons lost to cavity decay plus spontaneous scattering.

    Uses the per-atom rates, N * (gamma + 2 mu), integrated over the
    dissipative (twisting) evolution, whose physical duration is the
    accumulated chi*t divided by ``params.chi``. ``protocol="F"`` counts both
    halves of the echo; ``protocol="G"`` counts the forward-only sequence.
    Controlled-phase photons are not included. Returns ``(photons, convention)``.
    """
    if protocol not in ("F", "G"):
        raise ValueError("protocol must be 'F' or 'G'")
    model = getattr(model, "model", model)
    N = round(2 * model.S)
    legs = 2 if protocol == "F" else 1
    duration = legs * twist_strength(model, t) / params.chi
    photons = N * (params.gamma + 2 * params.mu) * duration
    convention = (
        f"N*(gamma + 2 mu) x twisting time; {protocol} counts "
        f"{'forward + reversed' if legs == 2 else 'forward'} evolution of one "
        "interferometer run; controlled-phase photons excluded"
    )
    return photons, convention
