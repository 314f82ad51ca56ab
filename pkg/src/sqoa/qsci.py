"""Sampled-subspace selection and projected-Hamiltonian ground states.

The subspace keeps the most frequently measured basis states; the cost
operator projected onto their span is a small sparse Hermitian matrix whose
ground pair approximates the full-space one, exactly so when every basis
state is kept. Because keeping more states only enlarges the span, the
subspace ground energy can never rise as the cutoff grows (for subspaces
nested the way a fixed sample produces them).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

from .encoding import Observable
from .engine import (
    SampleSet,
    Statevector,
    _lanczos_min,
    from_bitstring,
    to_bitstring,
)
from .errors import NumericalError, ValidationError

DENSE_EIG_CUTOFF = 1024


@dataclass(frozen=True)
class Subspace:
    """Ordered distinct basis bitstrings, most frequent first."""

    basis: tuple
    requested: int

    def __post_init__(self):
        if len(self.basis) < 1:
            raise ValidationError("subspace needs at least one basis state")
        widths = {len(b) for b in self.basis}
        if len(widths) != 1:
            raise ValidationError("basis strings have mixed widths")
        if len(set(self.basis)) != len(self.basis):
            raise ValidationError("basis strings must be distinct")

    @property
    def r(self) -> int:
        return len(self.basis)

    @property
    def n_qubits(self) -> int:
        return len(self.basis[0])

    @property
    def shortfall(self) -> bool:
        return len(self.basis) < self.requested


def select_subspace(samples: SampleSet, r: int) -> Subspace:
    """Keep the r most frequent bitstrings; count ties break by ascending value.

    When fewer than r distinct strings were sampled, all of them are kept and
    the subspace records the shortfall.
    """
    if r < 1:
        raise ValidationError(f"r must be >= 1, got {r}")
    ranked = sorted(
        samples.counts.items(), key=lambda kv: (-kv[1], from_bitstring(kv[0]))
    )
    return Subspace(tuple(key for key, _ in ranked[:r]), r)


def select_top_amplitudes(v: Statevector, r: int) -> Subspace:
    """Noise-free variant: keep the r largest |amplitude|^2 basis states."""
    if r < 1:
        raise ValidationError(f"r must be >= 1, got {r}")
    probs = np.abs(v.amplitudes) ** 2
    order = np.lexsort((np.arange(v.dim), -probs))
    kept = [int(i) for i in order[:r] if probs[i] > 0.0]
    if not kept:
        kept = [int(order[0])]
    return Subspace(tuple(to_bitstring(i, v.n_qubits) for i in kept), r)


@dataclass(frozen=True, eq=False)
class EffectiveHamiltonian:
    """Projection of an Observable onto a Subspace, as a sparse Hermitian matrix."""

    subspace: Subspace
    matrix: sp.csr_matrix = field(repr=False)

    @property
    def dim(self) -> int:
        return self.subspace.r


def build_effective_hamiltonian(h: Observable, s: Subspace) -> EffectiveHamiltonian:
    """Project term by term: basis state b couples only to b XOR x_mask.

    A term contributes an entry only when that partner is also in the
    subspace; diagonal terms (x_mask = 0) and the offset land on the
    diagonal. Hermiticity is structural because the partner relation is an
    involution and coefficients are real.
    """
    if s.n_qubits != h.n_qubits:
        raise ValidationError(
            f"width mismatch: observable {h.n_qubits}, subspace {s.n_qubits}"
        )
    dim = s.r
    basis = np.array([from_bitstring(b) for b in s.basis], dtype=np.int64)
    order = np.argsort(basis)
    sorted_basis = basis[order]
    diag = np.full(dim, h.offset, dtype=np.complex128)
    rows, cols, vals = [], [], []
    for coeff, ps in h.terms:
        value = coeff * (1j) ** ps.num_y
        signs = 1.0 - 2.0 * (np.bitwise_count(basis & ps.z_mask) & 1)
        if ps.x_mask == 0:
            diag += value * signs
            continue
        partners = basis ^ ps.x_mask
        pos = np.searchsorted(sorted_basis, partners)
        pos_clipped = np.minimum(pos, dim - 1)
        found = sorted_basis[pos_clipped] == partners
        src = np.flatnonzero(found)
        rows.append(order[pos_clipped[src]])
        cols.append(src)
        vals.append(value * signs[src])
    if rows:
        rows = np.concatenate(rows)
        cols = np.concatenate(cols)
        vals = np.concatenate(vals)
    else:
        rows = np.empty(0, dtype=np.int64)
        cols = np.empty(0, dtype=np.int64)
        vals = np.empty(0, dtype=np.complex128)
    mat = sp.coo_matrix((vals, (rows, cols)), shape=(dim, dim)).tocsr()
    mat = mat + sp.diags(diag, format="csr")
    return EffectiveHamiltonian(s, mat)


@dataclass(frozen=True, eq=False)
class QsciResult:
    """Ground pair of an effective Hamiltonian, in the subspace basis."""

    energy: float
    coefficients: np.ndarray
    subspace: Subspace

    def __post_init__(self):
        norm = np.linalg.norm(self.coefficients)
        if abs(norm - 1.0) > 1e-9:
            raise ValidationError(f"coefficient norm {norm} deviates from 1")


def qsci_ground(
    h_eff: EffectiveHamiltonian,
    seed: int = 0,
    tol: float = 1e-9,
    dense_cutoff: int = DENSE_EIG_CUTOFF,
    prior=None,
) -> QsciResult:
    """Minimal eigenpair of the projected operator.

    Dense diagonalization up to ``dense_cutoff``; restarted Lanczos above.

    A degenerate ground eigenvalue leaves the eigenvector underdetermined, and
    an arbitrary basis choice can average decodable structure away. When
    ``prior`` (subspace-basis coefficients, typically the sampled input state
    restricted to the subspace) is given and overlaps the ground eigenspace,
    the returned vector is the prior's normalized projection onto that
    eigenspace, which is deterministic and favors states the sampler saw.
    """
    dim = h_eff.dim
    mat = h_eff.matrix
    if prior is not None:
        prior = np.asarray(prior, dtype=np.complex128)
        pnorm = np.linalg.norm(prior)
        prior = prior / pnorm if pnorm > 0 else None
    if dim <= dense_cutoff:
        evals, evecs = np.linalg.eigh(mat.toarray())
        energy = float(evals[0])
        degenerate = np.flatnonzero(evals - evals[0] <= 1e-9 * max(1.0, abs(evals[0])))
        coeffs = np.ascontiguousarray(evecs[:, 0], dtype=np.complex128)
        if prior is not None and degenerate.size > 1:
            basis = evecs[:, degenerate]
            proj = basis @ (basis.conj().T @ prior)
            weight = np.linalg.norm(proj)
            if weight > 1e-12:
                coeffs = np.ascontiguousarray(proj / weight)
    else:
        # Lanczos keeps a degenerate eigenspace's component proportional to
        # the start vector, so starting from the prior has the same effect.
        energy, coeffs = _lanczos_min(lambda w: mat @ w, dim, seed, tol, v0=prior)
    residual = float(np.linalg.norm(mat @ coeffs - energy * coeffs))
    if residual > max(tol, 1e-8 * max(1.0, abs(energy))):
        raise NumericalError(f"subspace eigensolve residual {residual} exceeds {tol}")
    return QsciResult(energy, coeffs, h_eff.subspace)


def lift_to_statevector(res: QsciResult, n_qubits: int) -> Statevector:
    """Embed the subspace coefficients into the full 2^n_qubits space."""
    if res.subspace.n_qubits != n_qubits:
        raise ValidationError(
            f"subspace width {res.subspace.n_qubits} does not fit {n_qubits} qubits"
        )
    amps = np.zeros(1 << n_qubits, dtype=np.complex128)
    for c, bits in zip(res.coefficients, res.subspace.basis):
        amps[from_bitstring(bits)] = c
    return Statevector(amps, n_qubits)
