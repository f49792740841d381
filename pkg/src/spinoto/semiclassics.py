"""Classical kicked top on the unit sphere: map, Lyapunov exponent, Ehrenfest time."""

from dataclasses import dataclass, field

import numpy as np


@dataclass(frozen=True)
class SpherePoint:
    X: float
    Y: float
    Z: float

    def __post_init__(self):
        n = np.sqrt(self.X**2 + self.Y**2 + self.Z**2)
        if not np.isfinite(n) or n == 0:
            raise ValueError("sphere point needs a nonzero finite vector")
        # re-normalize so the point always lies on the unit sphere
        object.__setattr__(self, "X", float(self.X / n))
        object.__setattr__(self, "Y", float(self.Y / n))
        object.__setattr__(self, "Z", float(self.Z / n))

    @classmethod
    def from_angles(cls, theta, phi):
        return cls(np.sin(theta) * np.cos(phi), np.sin(theta) * np.sin(phi), np.cos(theta))

    @property
    def vec(self):
        return np.array([self.X, self.Y, self.Z])


def _kick(v, k, p):
    X, Y, Z = v
    # z rotation by p
    X, Y = X * np.cos(p) - Y * np.sin(p), X * np.sin(p) + Y * np.cos(p)
    # torsion: rotation about x by k X
    a = k * X
    Y, Z = Y * np.cos(a) - Z * np.sin(a), Y * np.sin(a) + Z * np.cos(a)
    return np.array([X, Y, Z])


def _kick_jacobian(v, k, p):
    X, Y, Z = v
    c, s = np.cos(p), np.sin(p)
    Rz = np.array([[c, -s, 0], [s, c, 0], [0, 0, 1]])
    X1, Y1, Z1 = Rz @ v
    a = k * X1
    ca, sa = np.cos(a), np.sin(a)
    # d(X2,Y2,Z2)/d(X1,Y1,Z1), with a depending on X1
    J2 = np.array([
        [1, 0, 0],
        [k * (-Y1 * sa - Z1 * ca), ca, -sa],
        [k * (Y1 * ca - Z1 * sa), sa, ca],
    ])
    return J2 @ Rz


def classical_kick_map(point, k, p_angle):
    """One kick: rotate about z by ``p_angle``, then about x by ``k X``."""
    return SpherePoint(*_kick(point.vec, k, p_angle))


def classical_trajectory(point, k, p_angle, n_kicks):
    """Array of shape (n_kicks + 1, 3), starting with ``point``."""
    out = [point.vec]
    v = point.vec
    for _ in range(n_kicks):
        v = _kick(v, k, p_angle)
        v /= np.linalg.norm(v)
        out.append(v)
    return np.array(out)


@dataclass
class LyapunovEstimate:
    lam: float
    n_steps: int
    start: SpherePoint
    renorm_every: int
    log_stretch: np.ndarray = field(repr=False)


def lyapunov_exponent(start, k, p_angle, n_steps=2000, renorm_every=1, transient=0):
    """Largest Lyapunov exponent per kick by tangent-map propagation.

    The tangent vector starts perpendicular to the position and is
    renormalized every ``renorm_every`` kicks; ``log_stretch`` holds the
    logarithm of each renormalization factor.
    """
    if n_steps < 100:
        raise ValueError("n_steps must be >= 100")
    if renorm_every < 1:
        raise ValueError("renorm_every must be >= 1")
    v = start.vec
    for _ in range(transient):
        v = _kick(v, k, p_angle)
        v /= np.linalg.norm(v)
    # fixed, deterministic initial tangent direction orthogonal to v
    seed = np.array([0.3, -0.7, 0.64])
    w = seed - v * (seed @ v)
    if np.linalg.norm(w) < 1e-8:
        w = np.cross(v, [1.0, 0.0, 0.0])
    w /= np.linalg.norm(w)
    logs = []
    for i in range(1, n_steps + 1):
        w = _kick_jacobian(v, k, p_angle) @ w
        v = _kick(v, k, p_angle)
        v /= np.linalg.norm(v)
        if i % renorm_every == 0 or i == n_steps:
            n = np.linalg.norm(w)
            logs.append(np.log(n))
            w /= n
    logs = np.array(logs)
    return LyapunovEstimate(float(logs.sum() / n_steps), n_steps, start, renorm_every, logs)


def ehrenfest_time(lam, S):
    """ln(S) / lam, in kicks."""
    if lam <= 0:
        raise ValueError("Ehrenfest time needs a positive Lyapunov exponent")
    return float(np.log(S) / lam)
