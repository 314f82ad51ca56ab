"""Pauli rounding to classical spins, cut recovery, and quality metrics."""

from __future__ import annotations

from dataclasses import dataclass

from .encoding import EncodingMap, Observable
from .engine import Statevector, expectation, pauli_expectation
from .errors import ValidationError
from .graph import Graph, cut_value
from .qsci import QsciResult, lift_to_statevector

# Goemans-Williamson guaranteed MaxCut ratio, kept as a reference line only.
GOEMANS_WILLIAMSON_RATIO = 0.878

DEFAULT_TIE_THRESHOLD = 1e-9


@dataclass(frozen=True)
class SpinSolution:
    """Decoded spins with their cut size; ``ties`` lists variables whose
    Pauli expectation sat inside the tie threshold and defaulted to +1."""

    spins: tuple
    cut_value: int
    ties: tuple


@dataclass(frozen=True)
class Metrics:
    alpha_r: float
    alpha_c: float
    e_min: float
    energy: float
    c_opt: int
    cut: int
    certified_c_opt: bool


def pauli_round(
    v: Statevector,
    m: EncodingMap,
    g: Graph,
    tie_threshold: float = DEFAULT_TIE_THRESHOLD,
) -> SpinSolution:
    """Decode each variable as the sign of its assigned Pauli expectation.

    Expectations inside [-tie_threshold, tie_threshold] have no meaningful
    sign (degenerate or symmetric states); they decode as +1 and are reported
    so callers can see the degeneracy.
    """
    if len(m.slot_of) != g.n:
        raise ValidationError("encoding covers a different number of variables")
    spins = []
    ties = []
    for i in range(g.n):
        e = pauli_expectation(v, m.pauli_of(i))
        if abs(e) <= tie_threshold:
            spins.append(1)
            ties.append(i)
        else:
            spins.append(1 if e > 0 else -1)
    spins = tuple(spins)
    return SpinSolution(spins, cut_value(g, spins), tuple(ties))


def compute_metrics(
    g: Graph,
    h: Observable,
    v_or_res,
    m: EncodingMap,
    e_min: float,
    c_opt: int,
    certified_c_opt: bool = True,
    tie_threshold: float = DEFAULT_TIE_THRESHOLD,
    rounded: SpinSolution = None,
) -> Metrics:
    """Energy and cut approximation ratios against precomputed oracles.

    Accepts either a full Statevector or a QsciResult; for the latter the
    subspace energy is used directly and the state is lifted for rounding.
    Pass ``rounded`` to reuse an existing decode instead of re-rounding.
    """
    if g.m == 0 or c_opt == 0:
        raise ValidationError("metrics undefined for graphs with no edges")
    if e_min == 0:
        raise ValidationError("metrics undefined for zero relaxed ground energy")
    if isinstance(v_or_res, QsciResult):
        energy = v_or_res.energy
        state = lift_to_statevector(v_or_res, m.n_qubits)
    else:
        state = v_or_res
        energy = expectation(h, state)
    if rounded is None:
        rounded = pauli_round(state, m, g, tie_threshold)
    return Metrics(
        alpha_r=energy / e_min,
        alpha_c=rounded.cut_value / c_opt,
        e_min=e_min,
        energy=energy,
        c_opt=c_opt,
        cut=rounded.cut_value,
        certified_c_opt=certified_c_opt,
    )
