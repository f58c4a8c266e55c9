"""Core simulator: states, gates, projection, fidelity, factorization."""

import numpy as np
import pytest

from intraport.errors import (
    ChannelOutOfRange,
    ImpossibleBranch,
    InvalidGate,
    InvalidInput,
    NotNormalized,
    ShapeMismatch,
)
from intraport.qsim import (
    ControlledNot,
    Hadamard,
    PureState,
    QUBIT_MINUS10,
    QUBIT_ONE,
    QUBIT_PLUS,
    QUBIT_ZERO,
    Segment,
    SingleQubit,
    apply_gate,
    channel_fidelity,
    equal_up_to_global_phase,
    factor_all,
    factor_channel,
    fidelity,
    make_state,
    project,
    random_qubit,
    reduced_density,
    run_circuit,
)
from intraport.circuit import Circuit

from helpers import (
    apply_circuit_oracle,
    gate_matrix_oracle,
    haar_qubit_array,
    product_oracle,
    random_state_vector,
)

SQ2 = 1 / np.sqrt(2)


def state_of(vec, n):
    return PureState(n, np.asarray(vec, dtype=complex))


# ---------------------------------------------------------------------------
# SingleQubit / PureState construction


def test_single_qubit_requires_normalization():
    with pytest.raises(NotNormalized):
        SingleQubit(1.0, 1.0)
    with pytest.raises(InvalidInput):
        SingleQubit(float("nan"), 0.0)


def test_pure_state_validation():
    with pytest.raises(ShapeMismatch):
        PureState(2, np.array([1.0, 0.0]))
    with pytest.raises(NotNormalized):
        PureState(1, np.array([1.0, 1.0]))
    with pytest.raises(InvalidInput):
        PureState(1, np.array([np.inf, 0.0]))


def test_pure_state_is_immutable():
    s = make_state([QUBIT_ZERO, QUBIT_ONE])
    with pytest.raises(AttributeError):
        s.channel_count = 5
    with pytest.raises(ValueError):
        s.amplitudes[0] = 1.0


# ---------------------------------------------------------------------------
# make_state


def test_make_state_basis_products():
    s = make_state([QUBIT_ZERO, QUBIT_ZERO])
    assert np.array_equal(s.amplitudes, [1, 0, 0, 0])
    # |10> sits at index 2 under the channel-1-most-significant convention
    s = make_state([QUBIT_ONE, QUBIT_ZERO])
    assert np.array_equal(s.amplitudes, [0, 0, 1, 0])


def test_make_state_matches_index_oracle():
    # (|0>+|1>)/sqrt2 x |1>: expected (0, 1/sqrt2, 0, 1/sqrt2)
    plus = np.array([SQ2, SQ2], dtype=complex)
    one = np.array([0, 1], dtype=complex)
    expected = product_oracle([plus, one])
    np.testing.assert_allclose(expected, [0, SQ2, 0, SQ2], atol=1e-15)
    s = make_state([QUBIT_PLUS, QUBIT_ONE])
    np.testing.assert_allclose(s.amplitudes, expected, atol=1e-15)


def test_make_state_random_matches_oracle():
    rng = np.random.default_rng(11)
    for _ in range(20):
        arrays = [haar_qubit_array(rng) for _ in range(4)]
        qubits = [SingleQubit(a[0], a[1]) for a in arrays]
        np.testing.assert_allclose(
            make_state(qubits).amplitudes, product_oracle(arrays), atol=1e-12
        )


def test_make_state_errors():
    with pytest.raises(InvalidInput):
        make_state([])
    bad = SingleQubit.__new__(SingleQubit)
    object.__setattr__(bad, "coeff0", 1.0)
    object.__setattr__(bad, "coeff1", 1.0)
    with pytest.raises(NotNormalized):
        make_state([bad])


# ---------------------------------------------------------------------------
# apply_gate


def test_hadamard_on_zero_and_one():
    s = apply_gate(make_state([QUBIT_ZERO]), Hadamard(1))
    np.testing.assert_allclose(s.amplitudes, [SQ2, SQ2], atol=1e-15)
    s = apply_gate(make_state([QUBIT_ONE]), Hadamard(1))
    np.testing.assert_allclose(s.amplitudes, [SQ2, -SQ2], atol=1e-15)


def test_cn_truth_table_exact():
    # |e1>|e2> -> |e1>|e1 xor e2> on every 2-channel basis state, exactly
    mapping = {0b00: 0b00, 0b01: 0b01, 0b10: 0b11, 0b11: 0b10}
    for src, dst in mapping.items():
        amps = np.zeros(4)
        amps[src] = 1.0
        out = apply_gate(state_of(amps, 2), ControlledNot(1, 2))
        expected = np.zeros(4)
        expected[dst] = 1.0
        assert np.array_equal(out.amplitudes, expected)


def test_gates_match_matrix_oracle():
    rng = np.random.default_rng(3)
    gates = [Hadamard(2), Hadamard(3), ControlledNot(3, 1), ControlledNot(1, 3),
             ControlledNot(2, 3)]
    for gate in gates:
        vec = random_state_vector(rng, 3)
        out = apply_gate(state_of(vec, 3), gate)
        np.testing.assert_allclose(
            out.amplitudes, gate_matrix_oracle(3, gate) @ vec, atol=1e-12
        )


def test_hadamard_involution_on_random_states():
    rng = np.random.default_rng(4)
    for k in (1, 2, 3):
        s = state_of(random_state_vector(rng, 3), 3)
        twice = apply_gate(apply_gate(s, Hadamard(k)), Hadamard(k))
        assert fidelity(s, twice) >= 1 - 1e-12


def test_gate_errors():
    s = make_state([QUBIT_ZERO, QUBIT_ZERO])
    with pytest.raises(ChannelOutOfRange):
        apply_gate(s, Hadamard(3))
    with pytest.raises(ChannelOutOfRange):
        apply_gate(s, ControlledNot(1, 5))
    with pytest.raises(InvalidGate):
        ControlledNot(2, 2)


def test_norm_preserved_by_random_circuits():
    rng = np.random.default_rng(5)
    for _ in range(50):
        s = state_of(random_state_vector(rng, 3), 3)
        for _ in range(10):
            if rng.random() < 0.5:
                s = apply_gate(s, Hadamard(int(rng.integers(1, 4))))
            else:
                c, t = rng.choice([1, 2, 3], size=2, replace=False)
                s = apply_gate(s, ControlledNot(int(c), int(t)))
        assert abs(np.vdot(s.amplitudes, s.amplitudes).real - 1) < 1e-12


# ---------------------------------------------------------------------------
# run_circuit


def test_run_circuit_empty_is_identity():
    s = make_state([QUBIT_PLUS, QUBIT_ONE])
    out = run_circuit(s, Circuit(2))
    np.testing.assert_array_equal(out.amplitudes, s.amplitudes)


def test_run_circuit_matches_gate_by_gate_oracle():
    gates = (Hadamard(2), ControlledNot(2, 3), ControlledNot(1, 2), Hadamard(1))
    circuit = Circuit(3, gates)
    rng = np.random.default_rng(6)
    for _ in range(10):
        vec = random_state_vector(rng, 3)
        out = run_circuit(state_of(vec, 3), circuit)
        np.testing.assert_allclose(
            out.amplitudes, apply_circuit_oracle(vec, 3, gates), atol=1e-12
        )


def test_run_circuit_segments_compose():
    gates = (Hadamard(2), ControlledNot(2, 3), ControlledNot(1, 2), Hadamard(1),
             ControlledNot(2, 3), Hadamard(3))
    circuit = Circuit(3, gates, border_index=4)
    rng = np.random.default_rng(7)
    vec = random_state_vector(rng, 3)
    s = state_of(vec, 3)
    alice = run_circuit(s, circuit, Segment.ALICE_ONLY)
    both = run_circuit(alice, circuit, Segment.BOB_ONLY)
    full = run_circuit(s, circuit, Segment.ALL)
    np.testing.assert_allclose(both.amplitudes, full.amplitudes, atol=1e-12)


def test_run_circuit_shape_mismatch():
    with pytest.raises(ShapeMismatch):
        run_circuit(make_state([QUBIT_ZERO]), Circuit(2))


def test_raw_application_is_linear():
    # alpha*s + beta*t maps to alpha*U s + beta*U t, amplitude-wise
    from intraport.qsim import _apply_gates

    rng = np.random.default_rng(8)
    gates = [Hadamard(1), ControlledNot(1, 3), Hadamard(3), ControlledNot(2, 1)]
    for _ in range(10):
        s = random_state_vector(rng, 3)
        t = random_state_vector(rng, 3)
        alpha, beta = rng.normal() + 1j * rng.normal(), rng.normal() + 1j * rng.normal()
        lhs = _apply_gates(alpha * s + beta * t, 3, gates)
        rhs = alpha * _apply_gates(s, 3, gates) + beta * _apply_gates(t, 3, gates)
        np.testing.assert_allclose(lhs, rhs, atol=1e-10)


# ---------------------------------------------------------------------------
# project


def test_project_eigenstate():
    prob, collapsed = project(make_state([QUBIT_ZERO]), 1, 0)
    assert prob == pytest.approx(1.0, abs=1e-15)
    np.testing.assert_allclose(collapsed.amplitudes, [1, 0], atol=1e-15)


def test_project_bell_branch():
    bell = state_of([SQ2, 0, 0, SQ2], 2)
    prob, collapsed = project(bell, 1, 1)
    assert prob == pytest.approx(0.5, abs=1e-12)
    np.testing.assert_allclose(collapsed.amplitudes, [0, 0, 0, 1], atol=1e-12)


def test_projection_completeness():
    rng = np.random.default_rng(9)
    for _ in range(20):
        s = state_of(random_state_vector(rng, 3), 3)
        for ch in (1, 2, 3):
            probs = []
            for outcome in (0, 1):
                try:
                    p, _ = project(s, ch, outcome)
                except ImpossibleBranch as exc:
                    p = exc.probability
                probs.append(p)
            assert abs(sum(probs) - 1) < 1e-12


def test_projection_reconstructs_densities():
    # The outcome mixture P(0) rho_0 + P(1) rho_1 reproduces the measured
    # channel's diagonal (measurement dephases it) and every other channel's
    # density exactly.
    rng = np.random.default_rng(10)
    for _ in range(10):
        s = state_of(random_state_vector(rng, 3), 3)
        for ch in (1, 2, 3):
            acc = {k: np.zeros((2, 2), dtype=complex) for k in (1, 2, 3)}
            for outcome in (0, 1):
                try:
                    p, collapsed = project(s, ch, outcome)
                except ImpossibleBranch:
                    continue
                for k in (1, 2, 3):
                    acc[k] += p * reduced_density(collapsed, k)
            np.testing.assert_allclose(
                acc[ch], np.diag(np.diag(reduced_density(s, ch))), atol=1e-10
            )
            for k in (1, 2, 3):
                if k != ch:
                    np.testing.assert_allclose(acc[k], reduced_density(s, k), atol=1e-10)


def test_project_impossible_branch():
    with pytest.raises(ImpossibleBranch) as exc_info:
        project(make_state([QUBIT_ZERO]), 1, 1)
    assert exc_info.value.probability == pytest.approx(0.0, abs=1e-15)
    with pytest.raises(ChannelOutOfRange):
        project(make_state([QUBIT_ZERO]), 2, 0)


# ---------------------------------------------------------------------------
# fidelity / phase comparison


def test_fidelity_basics():
    zero = make_state([QUBIT_ZERO])
    one = make_state([QUBIT_ONE])
    plus = make_state([QUBIT_PLUS])
    assert fidelity(zero, zero) == pytest.approx(1.0, abs=1e-15)
    assert fidelity(zero, one) == pytest.approx(0.0, abs=1e-15)
    assert fidelity(zero, plus) == pytest.approx(0.5, abs=1e-12)
    assert fidelity(plus, zero) == fidelity(zero, plus)
    with pytest.raises(ShapeMismatch):
        fidelity(zero, make_state([QUBIT_ZERO, QUBIT_ZERO]))


def test_equal_up_to_global_phase():
    rng = np.random.default_rng(12)
    s = state_of(random_state_vector(rng, 2), 2)
    minus_s = PureState(2, -s.amplitudes)
    assert equal_up_to_global_phase(s, minus_s, 1e-12)
    assert not equal_up_to_global_phase(
        make_state([QUBIT_ZERO]), make_state([QUBIT_ONE]), 1e-12
    )
    # (|1>-|0>)/sqrt2 equals (|0>-|1>)/sqrt2 up to the phase -1
    a = make_state([QUBIT_MINUS10])
    b = state_of([SQ2, -SQ2], 1)
    assert equal_up_to_global_phase(a, b, 1e-12)


# ---------------------------------------------------------------------------
# factorization


def test_factor_channel_basis_product():
    s = make_state([QUBIT_ZERO, QUBIT_ONE])
    factor, remainder = factor_channel(s, 1)
    assert fidelity(make_state([factor]), make_state([QUBIT_ZERO])) >= 1 - 1e-12
    assert fidelity(remainder, make_state([QUBIT_ONE])) >= 1 - 1e-12


def test_factor_channel_entangled_returns_none():
    bell = state_of([SQ2, 0, 0, SQ2], 2)
    assert factor_channel(bell, 1) is None


def test_factor_channel_round_trip():
    rng = np.random.default_rng(13)
    for _ in range(20):
        q = random_qubit(rng)
        s = make_state([q, QUBIT_PLUS])
        factor, remainder = factor_channel(s, 2)
        assert fidelity(make_state([factor]), make_state([QUBIT_PLUS])) >= 1 - 1e-10
        assert fidelity(remainder, make_state([q])) >= 1 - 1e-10


def test_factor_channel_errors():
    with pytest.raises(ChannelOutOfRange):
        factor_channel(make_state([QUBIT_ZERO, QUBIT_ZERO]), 3)
    with pytest.raises(InvalidInput):
        factor_channel(make_state([QUBIT_ZERO]), 1)


def test_factor_all_basis():
    s = make_state([QUBIT_ZERO, QUBIT_ONE, QUBIT_ZERO])
    factors = factor_all(s)
    expected = [QUBIT_ZERO, QUBIT_ONE, QUBIT_ZERO]
    for got, want in zip(factors, expected):
        assert fidelity(make_state([got]), make_state([want])) >= 1 - 1e-12


def test_factor_all_round_trip_random_products():
    rng = np.random.default_rng(14)
    for _ in range(20):
        qubits = [random_qubit(rng) for _ in range(4)]
        s = make_state(qubits)
        factors = factor_all(s)
        assert factors is not None
        for got, want in zip(factors, qubits):
            assert fidelity(make_state([got]), make_state([want])) >= 1 - 1e-10
        assert fidelity(make_state(factors), s) >= 1 - 1e-9


def test_factor_all_entangled_returns_none():
    bell = state_of([SQ2, 0, 0, SQ2], 2)
    assert factor_all(bell) is None


def test_channel_fidelity_matches_reduced_density():
    rng = np.random.default_rng(15)
    for _ in range(10):
        s = state_of(random_state_vector(rng, 3), 3)
        q = random_qubit(rng)
        for ch in (1, 2, 3):
            rho = reduced_density(s, ch)
            v = q.as_array()
            expected = float((v.conj() @ rho @ v).real)
            assert channel_fidelity(s, ch, q) == pytest.approx(expected, abs=1e-12)
