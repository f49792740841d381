import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from spinoto import protocols as P
from spinoto import spin
from spinoto.semiclassics import (
    SpherePoint,
    classical_kick_map,
    classical_trajectory,
    ehrenfest_time,
    lyapunov_exponent,
)

PRINTED_START = SpherePoint(0.5, np.sqrt(0.5), -0.5)
REFLECTED_START = SpherePoint(0.5, np.sqrt(0.5), 0.5)


def random_points(n, seed):
    rng = np.random.default_rng(seed)
    return [SpherePoint(*rng.normal(size=3)) for _ in range(n)]


def test_sphere_point_normalizes():
    p = SpherePoint(3, 0, 4)
    assert (p.X, p.Y, p.Z) == pytest.approx((0.6, 0, 0.8))
    with pytest.raises(ValueError):
        SpherePoint(0, 0, 0)


@settings(max_examples=50)
@given(
    theta=st.floats(0, np.pi),
    phi=st.floats(0, 2 * np.pi),
    k=st.floats(0, 8),
    p=st.floats(-4, 4),
)
def test_map_preserves_sphere(theta, phi, k, p):
    traj = classical_trajectory(SpherePoint.from_angles(theta, phi), k, p, 30)
    assert np.abs(np.linalg.norm(traj, axis=1) - 1).max() < 1e-12


def test_k_zero_is_z_rotation():
    start = SpherePoint(0.3, -0.4, 0.2)
    out = classical_kick_map(start, 0.0, 0.7).vec
    c, s = np.cos(0.7), np.sin(0.7)
    ref = np.array([[c, -s, 0], [s, c, 0], [0, 0, 1]]) @ start.vec
    assert np.allclose(out, ref, atol=1e-14)


def test_x_axis_zero_torsion():
    # the z rotation moves x-hat onto the y axis, where the torsion angle k X vanishes
    out = classical_kick_map(SpherePoint(1, 0, 0), 3.0, np.pi / 2).vec
    assert np.allclose(out, [0, 1, 0], atol=1e-15)


def test_sign_convention_matches_quantum_rotation():
    S = 400
    psi = spin.kicked_top_step(spin.coherent_state(S, np.pi / 2, 0), 0.0, np.pi / 2)
    assert np.allclose(spin.spin_expectations(psi) / S, [0, 1, 0], atol=1e-10)


@pytest.mark.parametrize("start", [PRINTED_START, SpherePoint(0.2, -0.5, 0.84)])
def test_quantum_classical_correspondence(start):
    S = 500
    theta = np.arccos(start.Z)
    phi = np.arctan2(start.Y, start.X)
    psi = spin.coherent_state(S, theta, phi)
    classical = classical_trajectory(start, 3.0, np.pi / 2, 4)
    for n in range(5):
        assert np.abs(spin.spin_expectations(psi) / S - classical[n]).max() < 0.05
        psi = spin.kicked_top_step(psi, 3.0, np.pi / 2)


def test_printed_start_matches_state():
    S = 500
    e = spin.spin_expectations(P.fig4_initial_state(S)) / S
    assert np.abs(e - PRINTED_START.vec).max() < 2e-3
    e = spin.spin_expectations(P.fig4_initial_state(S, y_sign=-1)) / S
    assert np.abs(e - REFLECTED_START.vec).max() < 2e-3


def test_lyapunov_k_zero():
    for start in random_points(5, 0):
        assert abs(lyapunov_exponent(start, 0.0, np.pi / 2, 500).lam) < 1e-6


def test_lyapunov_chaotic_positive():
    est = lyapunov_exponent(SpherePoint(0.2, -0.5, 0.84), 3.0, np.pi / 2, 3000)
    assert est.lam > 0.2


def test_lyapunov_renorm_interval_independent():
    start = SpherePoint(0.2, -0.5, 0.84)
    a = lyapunov_exponent(start, 3.0, np.pi / 2, 1000, renorm_every=1).lam
    b = lyapunov_exponent(start, 3.0, np.pi / 2, 1000, renorm_every=10).lam
    assert abs(a - b) < 1e-3


def test_lyapunov_small_k_regular():
    for start in random_points(10, 1):
        assert lyapunov_exponent(start, 0.5, np.pi / 2, 2000).lam < 0.01


def test_lyapunov_monotone_on_average():
    starts = random_points(50, 2)
    ks = [0.0, 1.0, 2.0, 3.0, 4.5, 6.0]
    means = [np.mean([lyapunov_exponent(s, k, np.pi / 2, 400).lam for s in starts]) for k in ks]
    assert all(b > a for a, b in zip(means, means[1:]))


def test_printed_start_regular_reflected_chaotic():
    # recorded behaviour: the printed start sits in a regular island of the k = 3 map
    assert lyapunov_exponent(PRINTED_START, 3.0, np.pi / 2, 4000).lam < 0.01
    assert lyapunov_exponent(REFLECTED_START, 3.0, np.pi / 2, 4000).lam > 0.2


def test_lyapunov_validation():
    with pytest.raises(ValueError):
        lyapunov_exponent(PRINTED_START, 3.0, np.pi / 2, 99)
    with pytest.raises(ValueError):
        lyapunov_exponent(PRINTED_START, 3.0, np.pi / 2, 200, renorm_every=0)


def test_ehrenfest_examples():
    assert ehrenfest_time(1.0, np.e) == pytest.approx(1.0)
    assert ehrenfest_time(0.5, 100) == pytest.approx(9.21, abs=5e-3)
    for bad in (0.0, -0.1):
        with pytest.raises(ValueError):
            ehrenfest_time(bad, 10)
