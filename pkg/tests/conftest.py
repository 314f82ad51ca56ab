import numpy as np

from sqoa.encoding import PauliString, observable

# independent dense route: explicit 2x2 matrices combined with np.kron,
# never the mask/phase rules the implementation uses
PAULI_2X2 = {
    "I": np.eye(2, dtype=np.complex128),
    "X": np.array([[0, 1], [1, 0]], dtype=np.complex128),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=np.complex128),
    "Z": np.array([[1, 0], [0, -1]], dtype=np.complex128),
}


def kron_string(ps: PauliString) -> np.ndarray:
    """Tensor product with qubit 0 as the least significant factor."""
    mat = np.array([[1.0]], dtype=np.complex128)
    for q in reversed(range(ps.width)):
        mat = np.kron(mat, PAULI_2X2[ps.axis_at(q)])
    return mat


def kron_observable(h) -> np.ndarray:
    dim = 1 << h.n_qubits
    out = h.offset * np.eye(dim, dtype=np.complex128)
    for coeff, ps in h.terms:
        out = out + coeff * kron_string(ps)
    return out


def random_observable(rng, n_qubits, n_terms):
    terms = []
    for _ in range(n_terms):
        x = int(rng.integers(0, 1 << n_qubits))
        z = int(rng.integers(0, 1 << n_qubits))
        terms.append((float(rng.normal()), PauliString(x, z, n_qubits)))
    return observable(terms, float(rng.normal()), n_qubits)


def random_state_array(rng, n_qubits):
    v = rng.normal(size=1 << n_qubits) + 1j * rng.normal(size=1 << n_qubits)
    return v / np.linalg.norm(v)
