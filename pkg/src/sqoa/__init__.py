"""Sampling-based quantum optimization for MaxCut.

Pipeline: pack classical variables three-to-a-qubit along Pauli axes, relax
the cut objective into a non-diagonal Pauli-sum Hamiltonian, prepare a low
energy state with a transferred linear angle schedule, sample it, diagonalize
the Hamiltonian on the span of the most frequent bitstrings, and round the
subspace ground state back to spins.
"""

from .ansatz import (
    AngleSchedule,
    LinxferParams,
    TuneReport,
    expand_schedule,
    fine_tune,
    optimize_random_init,
    prepare_state,
    tune_linxfer,
)
from .decode import GOEMANS_WILLIAMSON_RATIO, Metrics, SpinSolution, compute_metrics, pauli_round
from .encoding import (
    EncodingMap,
    Observable,
    PauliString,
    build_encoding,
    build_relaxed_hamiltonian,
    observable,
    qrac_state,
    strings_commute,
)
from .engine import (
    SampleSet,
    Statevector,
    apply_observable,
    apply_single_pauli_mixer,
    expectation,
    expm_apply,
    lanczos_ground,
    prepare_initial_state,
    sample_counts,
)
from .errors import NumericalError, SqoaError, ValidationError
from .graph import (
    Coloring,
    CutResult,
    Graph,
    best_cut,
    cut_value,
    generate_regular_graph,
    graph_from_text,
    graph_to_text,
    greedy_coloring,
    read_graph,
    write_graph,
)
from .qsci import (
    EffectiveHamiltonian,
    QsciResult,
    Subspace,
    build_effective_hamiltonian,
    lift_to_statevector,
    qsci_ground,
    select_subspace,
    select_top_amplitudes,
)
from .runner import RunConfig, RunRecord, run_baseline, run_sqoa, sweep
from .seeding import derive_seed

__version__ = "0.1.0"
