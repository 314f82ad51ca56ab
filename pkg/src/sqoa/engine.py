"""Matrix-free statevector numerics.

Basis convention: qubit 0 is the least significant bit of the amplitude
index; bitstrings render most-significant qubit first. A Pauli string acts on
a basis state as

    P |b> = i^(#Y) * (-1)^popcount(b & z_mask) |b XOR x_mask>

which is what the apply kernel, the dense expansion in
:meth:`sqoa.encoding.Observable.to_matrix`, and the subspace projection in
:mod:`sqoa.qsci` all share.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from numba import njit
from scipy.linalg import eigh_tridiagonal

from .encoding import AXES, Observable, PauliString
from .errors import NumericalError, ValidationError

DEFAULT_EXPM_TOL = 1e-10
DEFAULT_MAX_KRYLOV = 200
_BREAKDOWN = 1e-14
_SUBSTEP_CAP = 64

# 16-bit popcount parity lookup; kernels fold wider masks onto it.
_PARITY16 = (np.bitwise_count(np.arange(1 << 16, dtype=np.uint32)) & 1).astype(np.uint8)


@dataclass(frozen=True)
class Statevector:
    """Unit-norm complex amplitudes over the 2^n_qubits computational basis."""

    amplitudes: np.ndarray
    n_qubits: int

    def __post_init__(self):
        amps = np.ascontiguousarray(self.amplitudes, dtype=np.complex128)
        if amps.shape != (1 << self.n_qubits,):
            raise ValidationError(
                f"amplitude array of shape {amps.shape} does not match {self.n_qubits} qubits"
            )
        norm = np.linalg.norm(amps)
        if abs(norm - 1.0) > 1e-10:
            raise ValidationError(f"statevector norm {norm} deviates from 1")
        object.__setattr__(self, "amplitudes", amps)

    @property
    def dim(self) -> int:
        return self.amplitudes.shape[0]


@dataclass
class SampleSet:
    """Computational-basis measurement counts."""

    counts: dict
    shots: int
    n_qubits: int

    def __post_init__(self):
        if self.shots < 1:
            raise ValidationError(f"shots must be >= 1, got {self.shots}")
        total = sum(self.counts.values())
        if total != self.shots:
            raise ValidationError(f"counts sum to {total}, expected {self.shots}")
        for key in self.counts:
            if len(key) != self.n_qubits or set(key) - {"0", "1"}:
                raise ValidationError(f"malformed bitstring key {key!r}")


def to_bitstring(index: int, n_qubits: int) -> str:
    return format(index, f"0{n_qubits}b")


def from_bitstring(bits: str) -> int:
    return int(bits, 2)


def statevector_to_json(v: Statevector) -> dict:
    """Debug dump: amplitudes as [re, im] pairs in basis-index order."""
    return {
        "n_qubits": v.n_qubits,
        "amplitudes": [[float(a.real), float(a.imag)] for a in v.amplitudes],
    }


# ---------------------------------------------------------------------------
# observable application
# ---------------------------------------------------------------------------

@njit(cache=True)
def _apply_kernel(v, xs, coeffs, signs, offset, out):
    n = v.shape[0]
    nterms = xs.shape[0]
    for i in range(n):
        acc = offset * v[i]
        for t in range(nterms):
            j = i ^ xs[t]
            acc += (coeffs[t] * signs[t, j]) * v[j]
        out[i] = acc
    return out


@njit(cache=True)
def _apply_kernel_wide(v, xs, zs, coeffs, offset, parity, out):
    # fallback without the per-term sign table, for widths where the table
    # would not fit comfortably in memory
    n = v.shape[0]
    nterms = xs.shape[0]
    for i in range(n):
        acc = offset * v[i]
        for t in range(nterms):
            j = i ^ xs[t]
            m = j & zs[t]
            s = 1 - 2 * (parity[m & 0xFFFF] ^ parity[(m >> 16) & 0xFFFF])
            acc += (coeffs[t] * s) * v[j]
        out[i] = acc
    return out


_SIGN_TABLE_LIMIT = 1 << 26  # max terms * 2^width entries kept as int8


@lru_cache(maxsize=16)
def _compile(h: Observable):
    if h.n_qubits > 32:
        raise ValidationError("engine supports at most 32 qubits")
    nterms = h.num_terms
    xs = np.empty(nterms, dtype=np.int64)
    zs = np.empty(nterms, dtype=np.int64)
    coeffs = np.empty(nterms, dtype=np.complex128)
    for t, (coeff, ps) in enumerate(h.terms):
        xs[t] = ps.x_mask
        zs[t] = ps.z_mask
        coeffs[t] = coeff * (1j) ** ps.num_y
    dim = 1 << h.n_qubits
    signs = None
    if nterms * dim <= _SIGN_TABLE_LIMIT:
        idx = np.arange(dim, dtype=np.int64)
        signs = (1 - 2 * (np.bitwise_count(idx[None, :] & zs[:, None]) & 1)).astype(np.int8)
    return xs, zs, coeffs, complex(h.offset), signs


def _apply_arr(h: Observable, arr: np.ndarray) -> np.ndarray:
    xs, zs, coeffs, offset, signs = _compile(h)
    out = np.empty_like(arr)
    if signs is not None:
        _apply_kernel(arr, xs, coeffs, signs, offset, out)
    else:
        _apply_kernel_wide(arr, xs, zs, coeffs, offset, _PARITY16, out)
    return out


def _check_width(h: Observable, v: Statevector) -> None:
    if h.n_qubits != v.n_qubits:
        raise ValidationError(f"width mismatch: observable {h.n_qubits}, state {v.n_qubits}")


def apply_observable(h: Observable, v: Statevector) -> np.ndarray:
    """Return (offset*I + sum_k c_k P_k)|v> as a raw, unnormalized array."""
    _check_width(h, v)
    return _apply_arr(h, v.amplitudes)


def expectation(h: Observable, v: Statevector) -> float:
    """Real part of <v|H|v>; rejects states whose residual imaginary part exceeds 1e-10."""
    _check_width(h, v)
    val = np.vdot(v.amplitudes, _apply_arr(h, v.amplitudes))
    if abs(val.imag) > 1e-10 * max(1.0, abs(val.real)):
        raise NumericalError(f"expectation has imaginary residual {val.imag}")
    return float(val.real)


def pauli_expectation(v: Statevector, ps: PauliString) -> float:
    """<v|P|v> for a single Pauli string, computed without kernel dispatch."""
    if ps.width != v.n_qubits:
        raise ValidationError(f"width mismatch: string {ps.width}, state {v.n_qubits}")
    amps = v.amplitudes
    idx = np.arange(amps.shape[0])
    signs = 1.0 - 2.0 * (np.bitwise_count(idx & ps.z_mask) & 1)
    val = (1j) ** ps.num_y * np.vdot(amps[idx ^ ps.x_mask], signs * amps)
    if abs(val.imag) > 1e-10:
        raise NumericalError(f"Pauli expectation has imaginary residual {val.imag}")
    return float(val.real)


# ---------------------------------------------------------------------------
# initial states and mixers
# ---------------------------------------------------------------------------

def prepare_initial_state(n_qubits: int, mixer: str) -> Statevector:
    """Product eigenstate the single-Pauli mixer rotates smoothly: |+>, |i>, or |0>."""
    if n_qubits < 1:
        raise ValidationError(f"n_qubits must be >= 1, got {n_qubits}")
    if mixer not in AXES:
        raise ValidationError(f"mixer must be one of {AXES}, got {mixer!r}")
    dim = 1 << n_qubits
    if mixer == "Z":
        amps = np.zeros(dim, dtype=np.complex128)
        amps[0] = 1.0
    elif mixer == "X":
        amps = np.full(dim, 1.0 / math.sqrt(dim), dtype=np.complex128)
    else:
        idx = np.arange(dim)
        amps = (1j) ** np.bitwise_count(idx) / math.sqrt(dim)
    return Statevector(amps, n_qubits)


_MIXER_1Q = {
    "X": np.array([[0, 1], [1, 0]], dtype=np.complex128),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=np.complex128),
    "Z": np.array([[1, 0], [0, -1]], dtype=np.complex128),
}


def apply_single_pauli_mixer(mixer: str, beta: float, v: Statevector) -> Statevector:
    """Apply exp(-i*beta*P) to every qubit; exact since the factors commute."""
    if mixer not in AXES:
        raise ValidationError(f"mixer must be one of {AXES}, got {mixer!r}")
    rot = math.cos(beta) * np.eye(2) - 1j * math.sin(beta) * _MIXER_1Q[mixer]
    amps = v.amplitudes
    n = v.n_qubits
    for q in range(n):
        cube = amps.reshape(1 << (n - 1 - q), 2, 1 << q)
        amps = np.einsum("ab,ibj->iaj", rot, cube).reshape(-1)
    amps = amps / np.linalg.norm(amps)
    return Statevector(amps, n)


# ---------------------------------------------------------------------------
# Krylov propagation and extremal eigenpairs
# ---------------------------------------------------------------------------

def _orthogonalize(V, k, w):
    """Remove the components of w along the first k rows of V, in place."""
    overlaps = np.conj(V[:k] @ np.conj(w))
    w -= V[:k].T @ overlaps
    return w


def _lanczos_basis(matvec, v0, max_steps):
    """Lanczos tridiagonalization with full reorthogonalization.

    Returns (V, alphas, betas, beta_next) where V rows are the orthonormal
    basis; beta_next is 0 on breakdown (invariant subspace found).
    """
    n = v0.shape[0]
    V = np.empty((max_steps, n), dtype=np.complex128)
    alphas = np.empty(max_steps)
    betas = np.empty(max(max_steps - 1, 0))
    V[0] = v0
    k = 0
    w = matvec(V[0])
    while True:
        a = np.vdot(V[k], w).real
        alphas[k] = a
        w = w - a * V[k]
        if k > 0:
            w = w - betas[k - 1] * V[k - 1]
        _orthogonalize(V, k + 1, w)
        k += 1
        b = np.linalg.norm(w)
        if k == max_steps:
            return V, alphas, betas, b
        if b < _BREAKDOWN:
            return V[:k], alphas[:k], betas[:k - 1], 0.0
        betas[k - 1] = b
        V[k] = w / b
        w = matvec(V[k])


def _expm_from_tridiag(alphas, betas, t):
    lam, U = eigh_tridiagonal(alphas, betas)
    return U @ (np.exp(-1j * t * lam) * U[0, :])


def _expm_substep(matvec, dim, t, v, tol_rate, cap):
    """Advance exp(-i*s*H)v for the largest s <= t one Krylov space supports.

    tol_rate is the admissible error per unit |t|; the achieved s keeps the
    local Lanczos truncation estimate beta * |u_last| below tol_rate * |s|.
    Returns (new_v, s).
    """
    cap = min(cap, dim)
    n = v.shape[0]
    V = np.empty((cap, n), dtype=np.complex128)
    alphas = np.empty(cap)
    betas = np.empty(max(cap - 1, 0))
    V[0] = v
    w = matvec(v)
    k = 0
    while True:
        a = np.vdot(V[k], w).real
        alphas[k] = a
        w = w - a * V[k]
        if k > 0:
            w = w - betas[k - 1] * V[k - 1]
        _orthogonalize(V, k + 1, w)
        b = np.linalg.norm(w)
        used = k + 1
        if b < _BREAKDOWN:
            u = _expm_from_tridiag(alphas[:used], betas[:used - 1], t)
            return V[:used].T @ u, t
        if used == cap or used % 3 == 0:
            u = _expm_from_tridiag(alphas[:used], betas[:used - 1], t)
            if b * abs(u[used - 1]) <= tol_rate * abs(t):
                return V[:used].T @ u, t
        if used == cap:
            break
        betas[k] = b
        V[k + 1] = w / b
        w = matvec(V[k + 1])
        k += 1
    # the space cannot carry the full remaining time; shorten the step
    # geometrically until its truncation estimate fits the error budget
    lam, U = eigh_tridiagonal(alphas, betas)
    e1 = U[0, :]
    s = 0.85 * t
    for _ in range(600):
        u = U @ (np.exp(-1j * s * lam) * e1)
        if b * abs(u[cap - 1]) <= tol_rate * abs(s):
            return V.T @ u, s
        s = 0.85 * s
    raise NumericalError(
        f"Krylov exponential failed to converge with subspace dimension {cap}"
    )


def expm_apply(
    h: Observable,
    t: float,
    v: Statevector,
    tol: float = DEFAULT_EXPM_TOL,
    max_krylov: int = DEFAULT_MAX_KRYLOV,
) -> Statevector:
    """exp(-i*t*H)|v> via Hermitian Lanczos with adaptive time substepping.

    Each substep grows a Krylov space until the truncation estimate meets its
    share of ``tol``; if one space cannot carry the full remaining time, the
    step is shortened and the remainder handled by fresh spaces.
    """
    _check_width(h, v)
    if tol <= 0:
        raise ValidationError(f"tol must be positive, got {tol}")
    if t == 0.0:
        return Statevector(v.amplitudes.copy(), v.n_qubits)
    matvec = lambda w: _apply_arr(h, w)
    tol_rate = 0.25 * tol / abs(t)
    cap = min(_SUBSTEP_CAP, max_krylov)
    remaining = float(t)
    arr = v.amplitudes
    for _ in range(10_000):
        arr, advanced = _expm_substep(matvec, v.dim, remaining, arr, tol_rate, cap)
        arr = arr / np.linalg.norm(arr)
        remaining -= advanced
        if remaining == 0.0:
            return Statevector(arr, v.n_qubits)
    raise NumericalError("Krylov exponential stalled (too many substeps)")


def _lanczos_min(matvec, dim, seed, tol, block=40, max_restarts=200, v0=None):
    """Smallest eigenpair by restarted Lanczos with full reorthogonalization."""
    if v0 is None:
        rng = np.random.default_rng(seed)
        v0 = rng.normal(size=dim) + 1j * rng.normal(size=dim)
    v0 = np.asarray(v0, dtype=np.complex128)
    v0 = v0 / np.linalg.norm(v0)
    block = min(block, dim)
    residual = math.inf
    for _ in range(max_restarts):
        V, alphas, betas, _ = _lanczos_basis(matvec, v0, block)
        lam, U = eigh_tridiagonal(alphas, betas)
        x = V.T @ U[:, 0]
        x /= np.linalg.norm(x)
        energy = float(lam[0])
        r = matvec(x) - energy * x
        residual = float(np.linalg.norm(r))
        if residual <= tol:
            return energy, x
        v0 = x
    raise NumericalError(
        f"Lanczos did not reach residual {tol} within {max_restarts} restarts "
        f"(last residual {residual})"
    )


def lanczos_ground(
    h: Observable,
    seed: int = 0,
    tol: float = 1e-9,
    max_qubits: int = 20,
    block: int = 40,
    max_restarts: int = 200,
):
    """Ground energy and eigenvector of an Observable.

    Returns (energy, Statevector) with verified residual ||Hv - Ev|| <= tol.
    """
    if h.n_qubits > max_qubits:
        raise ValidationError(
            f"ground-state solve capped at {max_qubits} qubits, got {h.n_qubits}"
        )
    energy, x = _lanczos_min(
        lambda w: _apply_arr(h, w), 1 << h.n_qubits, seed, tol, block, max_restarts
    )
    return energy, Statevector(x, h.n_qubits)


# ---------------------------------------------------------------------------
# sampling
# ---------------------------------------------------------------------------

def sample_counts(v: Statevector, shots: int, seed: int = 0) -> SampleSet:
    """Multinomial draw from |amplitude|^2 via inverse-CDF lookup; seeded."""
    if shots < 1:
        raise ValidationError(f"shots must be >= 1, got {shots}")
    probs = np.abs(v.amplitudes) ** 2
    cdf = np.cumsum(probs)
    u = np.random.default_rng(seed).random(shots)
    idx = np.searchsorted(cdf, u, side="right")
    np.clip(idx, 0, v.dim - 1, out=idx)
    raw = np.bincount(idx, minlength=v.dim)
    counts = {
        to_bitstring(i, v.n_qubits): int(raw[i]) for i in np.flatnonzero(raw)
    }
    return SampleSet(counts, shots, v.n_qubits)
