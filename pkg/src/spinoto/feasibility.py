"""Order-of-magnitude cavity QED requirements for the interferometric protocol.

All formulas are exact expressions with the constants of the underlying
estimates; the estimates themselves are only meaningful up to O(1) factors.
"""

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class CavityParams:
    eta: float
    N: int
    k: float = 3.0
    Gamma: float = 1.0
    Delta: float = 500.0
    g: float = None
    kappa: float = None

    def __post_init__(self):
        if self.eta <= 0:
            raise ValueError("eta must be positive")
        if self.N < 1:
            raise ValueError("N must be >= 1")
        if (self.g is None) != (self.kappa is None):
            raise ValueError("give both g and kappa or neither")
        if self.g is not None:
            eta = 4 * self.g**2 / (self.kappa * self.Gamma)
            if abs(eta - self.eta) > 1e-9 * max(1.0, abs(self.eta)):
                raise ValueError(f"eta = {self.eta} inconsistent with 4 g^2 / (kappa Gamma) = {eta}")

    @classmethod
    def from_couplings(cls, g, kappa, Gamma, N, k=3.0, Delta=500.0):
        return cls(4 * g**2 / (kappa * Gamma), N, k, Gamma, Delta, g, kappa)


def phi_max(eta, N):
    """Largest controlled rotation angle before the gate photon is likely lost."""
    if eta <= 0 or N < 1:
        raise ValueError("need eta > 0 and N >= 1")
    return float(np.sqrt(eta / (8 * N)))


def gate_contrast(phi, eta, N):
    """Success probability exp(-phi / phi_max) of the controlled rotation."""
    if phi < 0:
        raise ValueError("phi must be >= 0")
    return float(np.exp(-phi / phi_max(eta, N)))


@dataclass(frozen=True)
class ZOpt:
    z: float
    valid: bool  # the optimum is only reachable for z <= 1


def z_opt(eta, N, Gamma, Delta):
    """Optimal detuning parameter sqrt(2 N eta) Gamma / (2 Delta) and its validity."""
    if min(eta, N, Gamma, Delta) <= 0:
        raise ValueError("inputs must be positive")
    z = float(np.sqrt(2 * N * eta) * Gamma / (2 * Delta))
    return ZOpt(z, z <= 1.0)


def scattering_rate(Gamma, g, Delta, z):
    """Spontaneous photon loss rate Gamma g^2 (2 - z) / (Delta^2 z^2) during the gate."""
    return Gamma * g**2 * (2 - z) / (Delta**2 * z**2)


def d_opt(eta):
    """Detuning parameter that balances cavity loss and spontaneous emission."""
    if eta <= 1:
        raise ValueError("d_opt needs eta > 1")
    return float(np.sqrt(8 * eta))


def rate_ratio(eta, d):
    """gamma / mu = 8 eta / d^2 for the twisting dynamics."""
    return 8 * eta / d**2


def eta_min(k, N):
    """Cooperativity needed to see the onset of chaos: ((k/2) ln N)^2."""
    if k <= 0 or N < 2:
        raise ValueError("need k > 0 and N >= 2")
    return float((k / 2 * np.log(N)) ** 2)


def report(params, phi=None, d=None):
    """Dictionary of all calculators for one parameter set (phi defaults to 1/sqrt(N))."""
    phi = 1 / np.sqrt(params.N) if phi is None else phi
    zo = z_opt(params.eta, params.N, params.Gamma, params.Delta)
    out = {
        "eta": params.eta,
        "N": params.N,
        "k": params.k,
        "phi": phi,
        "phi_max": phi_max(params.eta, params.N),
        "gate_contrast": gate_contrast(phi, params.eta, params.N),
        "z_opt": zo.z,
        "z_opt_valid": zo.valid,
        "eta_min": eta_min(params.k, params.N) if params.N >= 2 else None,
        "d_opt": d_opt(params.eta) if params.eta > 1 else None,
    }
    if d is not None:
        out["d"] = d
        out["gamma_over_mu"] = rate_ratio(params.eta, d)
    return out
