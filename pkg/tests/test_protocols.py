import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from spinoto import protocols as P
from spinoto import spin

from oracles import dense_ops, g_dense, oto_dense, propagator


def twisting_spec(S=3, phi_v=0.4, phi_w=0.7, chi=1.0, initial=None, axis_w="z"):
    init = spin.coherent_state(S, np.pi / 2, np.pi / 2) if initial is None else initial
    return P.ProtocolSpec(
        P.ModelSpec("twisting", S, chi=chi),
        init,
        V=P.Rotation("z", phi_v),
        W=P.Rotation(axis_w, phi_w),
    )


def test_f_zero_is_one():
    spec = P.fig3_spec(50)
    assert abs(P.interferometric_F(spec, 0) - 1) < 1e-12


def test_identity_operators_give_one():
    spec = P.ProtocolSpec(P.ModelSpec("twisting", 4), spin.coherent_state(4, 1.0, 0.3))
    for t in (0.0, 0.3, 2.0):
        assert abs(P.interferometric_F(spec, t) - 1) < 1e-12
        assert abs(P.time_ordered_G(spec, t) - 1) < 1e-12


def test_free_model_commuting_rotations():
    spec = twisting_spec(chi=0.0)
    for t in (0.5, 3.0):
        assert abs(P.direct_oto_F(spec, t) - 1) < 1e-12


@pytest.mark.parametrize("S", [1, 2.5, 8])
def test_direct_matches_dense_oracle(S):
    spec = twisting_spec(S, axis_w="x")
    for t in (0.1, 0.8):
        U = propagator("twisting", S, t)
        ref = oto_dense(U, spec.V.matrix(S), spec.W.matrix(S), spec.initial)
        assert abs(P.direct_oto_F(spec, t) - ref) < 1e-10
        assert abs(P.interferometric_F(spec, t) - ref) < 1e-10


def test_kicked_top_matches_dense_oracle():
    spec = P.fig4_spec(20)
    S = spec.model.S
    for t in (1, 4):
        U = propagator("kicked_top", S, t)
        ref = oto_dense(U, spec.V.matrix(S), spec.W.matrix(S), spec.initial)
        assert abs(P.interferometric_F(spec, t) - ref) < 1e-10
        assert abs(P.time_ordered_G(spec, t) - g_dense(U, spec.V.matrix(S), spec.initial)) < 1e-10


def test_interferometric_equals_direct_fig3():
    spec = P.fig3_spec(50)
    for t in np.linspace(0, 0.12, 7):
        assert abs(P.interferometric_F(spec, t) - P.direct_oto_F(spec, t)) < 1e-10


def test_interferometric_equals_direct_fig4():
    spec = P.fig4_spec(100)
    for t in (0, 3, 8):
        assert abs(P.interferometric_F(spec, t) - P.direct_oto_F(spec, t)) < 1e-10


def test_imaginary_part_sign_convention():
    # non-commuting W picks up a nonzero Im F; both code paths must agree on its sign
    spec = twisting_spec(2, axis_w="x")
    F = P.interferometric_F(spec, 0.6)
    assert abs(F.imag) > 1e-3
    assert abs(F - P.direct_oto_F(spec, 0.6)) < 1e-12


def test_commutator_identity():
    spec = P.fig3_spec(50)
    for t in (0.01, 0.05, 0.1):
        F = P.interferometric_F(spec, t)
        assert abs(2 * (1 - F.real) - P.squared_commutator(spec, t)) < 1e-9


def test_distinguishability_identity():
    spec = P.fig4_spec(50)
    for t in (0, 2, 5):
        assert abs(P.distinguishability(spec, t) - abs(P.interferometric_F(spec, t)) ** 2) < 1e-9
    assert P.distinguishability(spec, 0) == pytest.approx(1, abs=1e-12)


def test_distinguishability_identity_v():
    spec = P.ProtocolSpec(P.ModelSpec("kicked_top", 5), spin.coherent_state(5, 1, 1), W=P.Rotation("x", 0.3))
    for t in (1, 3):
        assert abs(P.distinguishability(spec, t) - 1) < 1e-12


def test_control_expectations_branch_overlap():
    cs = P.interferometric_state(P.fig3_spec(10), 0.05)
    x, y = cs.control_expectations()
    z = np.vdot(cs.branch0, cs.branch1)
    assert (x, y) == (z.real, z.imag)
    assert abs(np.linalg.norm(cs.branch0) - 1) < 1e-12
    assert abs(np.linalg.norm(cs.branch1) - 1) < 1e-12


def test_g_zero_and_identity():
    spec = P.fig4_spec(50)
    assert abs(P.time_ordered_G(spec, 0) - 1) < 1e-12


def test_forward_only_single_pair_equal():
    spec = twisting_spec(2)
    V = spec.V
    assert abs(P.forward_only_time_ordered(spec.model, spec.initial, [V], [V], [0.7]) - 1) < 1e-12


def test_forward_only_s2_generic_pair():
    S, t = 2, 0.9
    spec = twisting_spec(S, initial=spin.coherent_state(S, 1.1, 0.4))
    V1, W1 = P.Rotation("z", 0.3), P.Rotation("z", 1.2)
    got = P.forward_only_time_ordered(spec.model, spec.initial, [V1], [W1], [t])
    U = propagator("twisting", S, t)
    v_t = U.conj().T @ V1.matrix(S) @ U
    w_t = U.conj().T @ W1.matrix(S) @ U
    ref = complex(spec.initial.conj() @ v_t.conj().T @ w_t @ spec.initial)
    assert abs(got - ref) < 1e-10


def test_forward_only_reduces_to_g():
    spec = P.fig4_spec(50)
    V = spec.V
    for t in (1, 4, 7):
        got = P.forward_only_time_ordered(spec.model, spec.initial, [None, V], [V, None], [0, t])
        assert abs(got - P.time_ordered_G(spec, t)) < 1e-10


def test_forward_only_two_times_dense():
    S = 2.5
    model = P.ModelSpec("twisting", S)
    psi = spin.coherent_state(S, 0.9, 0.2)
    A, B, C, D = (P.Rotation(a, x) for a, x in (("z", 0.3), ("x", 0.5), ("y", 0.2), ("z", 0.9)))
    t1, t2 = 0.4, 1.1
    got = P.forward_only_time_ordered(model, psi, [A, B], [C, D], [t1, t2])

    def heis(op, t):
        U = propagator("twisting", S, t)
        return U.conj().T @ op.matrix(S) @ U

    left = heis(B, t2) @ heis(A, t1)
    right = heis(D, t2) @ heis(C, t1)
    ref = complex(psi.conj() @ left.conj().T @ right @ psi)
    assert abs(got - ref) < 1e-10


def test_forward_only_rejects_bad_input():
    spec = twisting_spec(2)
    with pytest.raises(ValueError):
        P.forward_only_time_ordered(spec.model, spec.initial, [None, None], [None, None], [1.0, 0.5])
    with pytest.raises(ValueError):
        P.forward_only_time_ordered(spec.model, spec.initial, [None], [None, None], [1.0])


def test_hermitian_commuting_is_one():
    S = 3
    ops = spin.make_collective_ops(S)
    r = P.hermitian_oto(P.ModelSpec("kicked_top", S), spin.coherent_state(S, 1, 0.5), ops.Sz, ops.Sz, 0)
    assert r.ratio == pytest.approx(1, abs=1e-12)


def test_hermitian_s1_brute_force():
    Sx, Sy, Sz = dense_ops(1)
    psi = np.array([1, 0, 0], dtype=complex)
    r = P.hermitian_oto(P.ModelSpec("twisting", 1), psi, Sz, Sx, 0, eps=0.1)

    def ev(*ops):
        out = psi
        for op in reversed(ops):
            out = op @ out
        return complex(psi.conj() @ out).real

    num = ev(Sz, Sx, Sz, Sx) + ev(Sx, Sz, Sx, Sz)
    den = ev(Sx, Sz, Sz, Sx) + ev(Sz, Sx, Sx, Sz)
    # on |z>: Sz Sx|z> has no m=1 part, so the numerator vanishes
    assert num == pytest.approx(0, abs=1e-14)
    assert den == pytest.approx(0.5, abs=1e-14)
    assert r.ratio == pytest.approx(num / den, abs=1e-12)
    assert r.probability == pytest.approx(1e-3 * den / 2, rel=1e-12)


def test_hermitian_decays_with_f():
    S = 25
    ops = spin.make_collective_ops(S)
    spec = P.fig4_spec(50)
    r0 = P.hermitian_oto(spec.model, spec.initial, ops.Sz / S, ops.Sz / S, 0).ratio
    r8 = P.hermitian_oto(spec.model, spec.initial, ops.Sz / S, ops.Sz / S, 8).ratio
    assert r0 == pytest.approx(1)
    assert r8 < r0


def test_hermitian_rejects():
    S = 1
    Sx, Sy, Sz = dense_ops(S)
    model = P.ModelSpec("twisting", S)
    with pytest.raises(ValueError):
        P.hermitian_oto(model, np.array([1, 0, 0]), Sz + 1j * Sx, Sz, 0.1)
    with pytest.raises(ValueError):
        P.hermitian_oto(model, np.array([1, 0, 0]), np.zeros((3, 3)), Sz, 0.1)


def test_rejects_negative_time():
    spec = twisting_spec()
    for fn in (P.interferometric_F, P.direct_oto_F, P.time_ordered_G):
        with pytest.raises(ValueError):
            fn(spec, -0.1)


def test_rejects_fractional_kicks():
    with pytest.raises(ValueError):
        P.interferometric_F(P.fig4_spec(10), 1.5)


def test_rejects_non_unitary():
    with pytest.raises(ValueError):
        P.ProtocolSpec(P.ModelSpec("twisting", 1), np.array([1, 0, 0]), V=np.diag([1, 2, 1]))


def test_rejects_wrong_shape_and_kind():
    with pytest.raises(ValueError):
        P.ProtocolSpec(P.ModelSpec("twisting", 1), np.array([1, 0]))
    with pytest.raises(ValueError):
        P.ModelSpec("ising", 2)


def test_evaluate_series_workers_identical():
    spec = P.fig3_spec(20)
    times = np.linspace(0, 0.3, 6)
    a = P.evaluate_series(P.interferometric_F, spec, times, workers=1)
    b = P.evaluate_series(P.interferometric_F, spec, times, workers=3)
    assert np.array_equal(a, b)


def test_kicked_top_series_shape():
    s = P.kicked_top_series(P.fig4_spec(20), 5)
    assert list(s.times) == list(range(6))
    assert s.F.shape == s.G.shape == (6,)


def test_fig4_state_direction():
    S = 200
    e = spin.spin_expectations(P.fig4_initial_state(S)) / S
    assert np.allclose(e, [0.5, np.sqrt(0.5), -0.5], atol=1e-2)
    with pytest.raises(ValueError):
        P.fig4_initial_state(S, 0)


@settings(max_examples=20, deadline=None)
@given(
    S=st.integers(1, 12).map(lambda n: n / 2),
    phi=st.floats(-3, 3),
    t=st.floats(0, 3),
    theta=st.floats(0, np.pi),
)
def test_properties_unitary(S, phi, t, theta):
    spec = P.ProtocolSpec(
        P.ModelSpec("twisting", S),
        spin.coherent_state(S, theta, 0.3),
        V=P.Rotation("z", phi),
        W=P.Rotation("z", 0.5 * phi),
    )
    F = P.interferometric_F(spec, t)
    G = P.time_ordered_G(spec, t)
    assert abs(F) <= 1 + 1e-9 and abs(G) <= 1 + 1e-9
    assert abs(F - P.direct_oto_F(spec, t)) < 1e-10
    assert abs(P.distinguishability(spec, t) - abs(F) ** 2) < 1e-9
    assert abs(2 * (1 - F.real) - P.squared_commutator(spec, t)) < 1e-9
    assert abs(P.interferometric_F(spec, 0) - 1) < 1e-12


@settings(max_examples=15, deadline=None)
@given(N=st.integers(2, 40), kicks=st.integers(0, 6))
def test_properties_kicked_top(N, kicks):
    spec = P.fig4_spec(N)
    F = P.interferometric_F(spec, kicks)
    assert abs(F - P.direct_oto_F(spec, kicks)) < 1e-10
    got = P.forward_only_time_ordered(spec.model, spec.initial, [None, spec.V], [spec.V, None], [0, kicks])
    assert abs(got - P.time_ordered_G(spec, kicks)) < 1e-10
