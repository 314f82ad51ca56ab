"""Variable-to-qubit packing and cost Hamiltonians as Pauli sums.

Conventions used throughout the package:

* Qubit 0 is the least significant bit of a computational-basis index.
* Pauli strings are held in symplectic form: ``x_mask`` bit j set means the
  string acts with X or Y on qubit j, ``z_mask`` bit j set means Z or Y.
  A qubit with both bits set carries Y (the matrix Y, not the product ZX).
* Text labels such as "XIZ" are written most-significant qubit first, i.e.
  the rightmost character is qubit 0, matching how basis bitstrings print.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np

from .errors import ValidationError
from .graph import Coloring, Graph, validate_coloring

AXES = ("X", "Y", "Z")


@dataclass(frozen=True)
class PauliString:
    """One tensor product of single-qubit Paulis, in symplectic (x, z) masks."""

    x_mask: int
    z_mask: int
    width: int

    def __post_init__(self):
        limit = 1 << self.width
        if not (0 <= self.x_mask < limit and 0 <= self.z_mask < limit):
            raise ValidationError("mask does not fit the declared width")

    @property
    def is_identity(self) -> bool:
        return self.x_mask == 0 and self.z_mask == 0

    @property
    def num_y(self) -> int:
        return (self.x_mask & self.z_mask).bit_count()

    def axis_at(self, qubit: int) -> str:
        x = (self.x_mask >> qubit) & 1
        z = (self.z_mask >> qubit) & 1
        return ("I", "X", "Z", "Y")[x + 2 * z]

    def label(self) -> str:
        return "".join(self.axis_at(q) for q in reversed(range(self.width)))

    @classmethod
    def from_label(cls, label: str) -> "PauliString":
        x = z = 0
        width = len(label)
        for pos, ch in enumerate(label):
            q = width - 1 - pos
            if ch in ("X", "Y"):
                x |= 1 << q
            if ch in ("Z", "Y"):
                z |= 1 << q
            if ch not in "IXYZ":
                raise ValidationError(f"invalid Pauli character {ch!r}")
        return cls(x, z, width)

    @classmethod
    def single(cls, qubit: int, axis: str, width: int) -> "PauliString":
        if axis not in AXES:
            raise ValidationError(f"axis must be one of {AXES}, got {axis!r}")
        bit = 1 << qubit
        x = bit if axis in ("X", "Y") else 0
        z = bit if axis in ("Z", "Y") else 0
        return cls(x, z, width)


def strings_commute(a: PauliString, b: PauliString) -> bool:
    """Symplectic product: commute iff anticommuting single-qubit overlaps are even."""
    if a.width != b.width:
        raise ValidationError(f"width mismatch: {a.width} vs {b.width}")
    return ((a.x_mask & b.z_mask).bit_count() + (a.z_mask & b.x_mask).bit_count()) % 2 == 0


@dataclass(frozen=True)
class Observable:
    """Real-weighted Pauli sum plus a scalar offset; Hermitian by construction.

    ``terms`` holds (coefficient, PauliString) pairs with distinct strings;
    use :func:`observable` to build one with merging and identity folding.
    """

    terms: tuple
    offset: float
    n_qubits: int

    def __post_init__(self):
        seen = set()
        for coeff, ps in self.terms:
            if not math.isfinite(coeff):
                raise ValidationError("non-finite coefficient")
            if ps.width != self.n_qubits:
                raise ValidationError("term width does not match observable width")
            key = (ps.x_mask, ps.z_mask)
            if key in seen:
                raise ValidationError(f"duplicate Pauli string {ps.label()}")
            seen.add(key)
        if not math.isfinite(self.offset):
            raise ValidationError("non-finite offset")

    @property
    def num_terms(self) -> int:
        return len(self.terms)

    def to_matrix(self) -> np.ndarray:
        """Dense matrix from the mask/phase rules (intended for small widths)."""
        dim = 1 << self.n_qubits
        mat = np.zeros((dim, dim), dtype=np.complex128)
        np.fill_diagonal(mat, self.offset)
        idx = np.arange(dim)
        for coeff, ps in self.terms:
            val = coeff * (1j) ** ps.num_y
            signs = 1.0 - 2.0 * (np.bitwise_count(idx & ps.z_mask) & 1)
            mat[idx ^ ps.x_mask, idx] += val * signs
        return mat

    def to_json_dict(self) -> dict:
        return {
            "n_qubits": self.n_qubits,
            "offset": self.offset,
            "terms": [{"coeff": c, "pauli": ps.label()} for c, ps in self.terms],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_json_dict(), sort_keys=True)

    @classmethod
    def from_json_dict(cls, data: dict) -> "Observable":
        terms = [(float(t["coeff"]), PauliString.from_label(t["pauli"])) for t in data["terms"]]
        return observable(terms, float(data["offset"]), int(data["n_qubits"]))


def observable(terms, offset: float, n_qubits: int) -> Observable:
    """Build an Observable, merging equal strings and folding identities into the offset."""
    merged = {}
    total_offset = float(offset)
    for coeff, ps in terms:
        if ps.is_identity:
            total_offset += coeff
            continue
        key = (ps.x_mask, ps.z_mask)
        if key in merged:
            merged[key] = (merged[key][0] + coeff, ps)
        else:
            merged[key] = (float(coeff), ps)
    kept = tuple((c, ps) for c, ps in merged.values() if c != 0.0)
    return Observable(kept, total_offset, n_qubits)


# ---------------------------------------------------------------------------
# QRAC packing
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class EncodingMap:
    """Assignment of each classical variable to a (qubit, Pauli axis) slot."""

    slot_of: tuple  # variable index -> (qubit, axis)
    n_qubits: int
    vars_per_qubit: int

    def __post_init__(self):
        if self.vars_per_qubit not in (1, 2, 3):
            raise ValidationError(f"vars_per_qubit must be 1, 2 or 3, got {self.vars_per_qubit}")
        per_qubit = {}
        for i, (q, axis) in enumerate(self.slot_of):
            if not (0 <= q < self.n_qubits):
                raise ValidationError(f"variable {i} assigned to qubit {q} out of range")
            if axis not in AXES:
                raise ValidationError(f"variable {i} has invalid axis {axis!r}")
            slots = per_qubit.setdefault(q, set())
            if axis in slots:
                raise ValidationError(f"qubit {q} hosts two variables on axis {axis}")
            slots.add(axis)
        for q, slots in per_qubit.items():
            if len(slots) > self.vars_per_qubit:
                raise ValidationError(f"qubit {q} hosts more than {self.vars_per_qubit} variables")

    def qubit_of(self, var: int) -> int:
        return self.slot_of[var][0]

    def axis_of(self, var: int) -> str:
        return self.slot_of[var][1]

    def pauli_of(self, var: int) -> PauliString:
        q, axis = self.slot_of[var]
        return PauliString.single(q, axis, self.n_qubits)


def build_encoding(g: Graph, c: Coloring, k: int = 3) -> EncodingMap:
    """Pack each color class into ceil(|V_c|/k) qubits.

    Within a qubit, axes are assigned in X, Y, Z order by ascending vertex
    index. k=1 reproduces the Ising case exactly: variable i sits on axis Z
    of qubit i, so basis bitstrings read directly as variable assignments.
    k=2 is mechanically supported but experimental; only k=3 and k=1 are
    exercised by the benchmark suite.
    """
    validate_coloring(g, c)
    if k not in (1, 2, 3):
        raise ValidationError(f"k must be 1, 2 or 3, got {k}")
    if k == 1:
        return EncodingMap(tuple((v, "Z") for v in range(g.n)), g.n, 1)
    axes = AXES[:k]
    slot_of = [None] * g.n
    qubit = 0
    for color in range(c.num_colors):
        members = [v for v in range(g.n) if c.color_of[v] == color]
        for chunk_start in range(0, len(members), k):
            chunk = members[chunk_start:chunk_start + k]
            for pos, v in enumerate(chunk):
                slot_of[v] = (qubit, axes[pos])
            qubit += 1
    m = EncodingMap(tuple(slot_of), qubit, k)
    for u, v in g.edges:
        if m.qubit_of(u) == m.qubit_of(v):
            raise ValidationError(f"adjacent variables {u},{v} packed into one qubit")
    return m


def build_relaxed_hamiltonian(g: Graph, m: EncodingMap) -> Observable:
    """Packed MaxCut cost operator -sum_edges (1 - f * P_i P_j) / 2.

    The Pauli factor weight f equals the packing density k, so k=3 gives the
    qubit-compressed relaxation and k=1 reproduces the diagonal Ising cost
    whose expectation value on |s> is minus the cut size of s.
    """
    if len(m.slot_of) != g.n:
        raise ValidationError("encoding covers a different number of variables")
    f = float(m.vars_per_qubit)
    terms = []
    for u, v in g.edges:
        qu, qv = m.qubit_of(u), m.qubit_of(v)
        if qu == qv:
            raise ValidationError(f"edge ({u},{v}) has both endpoints on qubit {qu}")
        ps = PauliString(
            m.pauli_of(u).x_mask | m.pauli_of(v).x_mask,
            m.pauli_of(u).z_mask | m.pauli_of(v).z_mask,
            m.n_qubits,
        )
        terms.append((f / 2.0, ps))
    return observable(terms, -g.m / 2.0, m.n_qubits)


# ---------------------------------------------------------------------------
# single-qubit QRAC state
# ---------------------------------------------------------------------------

_PAULI_1Q = {
    "X": np.array([[0, 1], [1, 0]], dtype=np.complex128),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=np.complex128),
    "Z": np.array([[1, 0], [0, -1]], dtype=np.complex128),
}


def qrac_state(x1: int, x2: int, x3: int) -> np.ndarray:
    """Density matrix packing three bits into one qubit's Bloch vector.

    The Bloch vector points along ((-1)^x1, (-1)^x2, (-1)^x3) / sqrt(3), so
    each bit decodes correctly with probability (1 + 1/sqrt(3)) / 2.
    """
    for b in (x1, x2, x3):
        if b not in (0, 1):
            raise ValidationError(f"bits must be 0 or 1, got {b}")
    bloch = (
        (-1) ** x1 * _PAULI_1Q["X"]
        + (-1) ** x2 * _PAULI_1Q["Y"]
        + (-1) ** x3 * _PAULI_1Q["Z"]
    )
    return (np.eye(2, dtype=np.complex128) + bloch / math.sqrt(3)) / 2.0
