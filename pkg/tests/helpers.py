"""Independent oracles used to pin expected values.

Everything here recomputes results through a different route than the
package (explicit basis-index bookkeeping and dense matrices), so tests
compare two independent derivations.
"""

import numpy as np

from intraport.qsim import ControlledNot, Hadamard


def basis_index(bits):
    """Index of |b1 b2 ... bN> with channel 1 as the most significant bit."""
    idx = 0
    for b in bits:
        idx = (idx << 1) | b
    return idx


def product_oracle(qubit_arrays):
    """Tensor product computed entry by entry from basis indices."""
    n = len(qubit_arrays)
    out = np.zeros(2**n, dtype=complex)
    for idx in range(2**n):
        amp = 1.0 + 0j
        for k in range(n):
            bit = (idx >> (n - 1 - k)) & 1
            amp *= qubit_arrays[k][bit]
        out[idx] = amp
    return out


def gate_matrix_oracle(n, gate):
    """Dense 2^n x 2^n matrix built from the gate's basis action."""
    dim = 2**n
    u = np.zeros((dim, dim), dtype=complex)
    if isinstance(gate, Hadamard):
        k = gate.channel
        s = 1 / np.sqrt(2)
        for col in range(dim):
            bit = (col >> (n - k)) & 1
            u[col, col] += s * (1.0 if bit == 0 else -1.0)
            u[col ^ (1 << (n - k)), col] += s
    elif isinstance(gate, ControlledNot):
        for col in range(dim):
            if (col >> (n - gate.control)) & 1:
                u[col ^ (1 << (n - gate.target)), col] = 1.0
            else:
                u[col, col] = 1.0
    else:
        raise TypeError(f"unknown gate {gate!r}")
    return u


def circuit_matrix_oracle(n, gates):
    u = np.eye(2**n, dtype=complex)
    for g in gates:
        u = gate_matrix_oracle(n, g) @ u
    return u


def apply_circuit_oracle(amps, n, gates):
    return circuit_matrix_oracle(n, gates) @ amps


def permute_channels_oracle(amps, n, perm):
    """Amplitudes after moving channel i's content to channel perm[i].

    perm maps 1-based source channel -> 1-based destination channel.
    """
    out = np.zeros_like(amps)
    for idx in range(2**n):
        new_idx = 0
        for ch in range(1, n + 1):
            bit = (idx >> (n - ch)) & 1
            new_idx |= bit << (n - perm[ch])
        out[new_idx] = amps[idx]
    return out


def random_state_vector(rng, n):
    v = rng.normal(size=2**n) + 1j * rng.normal(size=2**n)
    return v / np.linalg.norm(v)


def haar_qubit_array(rng):
    v = rng.normal(size=2) + 1j * rng.normal(size=2)
    return v / np.linalg.norm(v)
