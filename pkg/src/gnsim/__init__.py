"""Trotter circuit compiler and simulator for the multi-flavor lattice
Gross-Neveu model, with least-squares compression of the quartic diagonal
blocks onto nearest-neighbor ansaetze."""

__version__ = "0.1.0"

from .circuit import Circuit, CircuitStats, Gate, depth, lower_to_cz, stats
from .ldoa import (
    AnsatzTemplate,
    LdoaSolution,
    LinearSystem,
    PhaseVector,
    ansatz_phase_map,
    assemble_system,
    diagonal_phase_of_circuit,
    flavor_template,
    pseudoinverse,
    pseudoinverse_solve,
    residual_unitary_norm,
    solve_ansatz,
)
from .model import (
    Hamiltonian,
    LatticeParams,
    Observable,
    PauliString,
    build_hamiltonian,
    build_quadratic,
    build_quartic,
    density_correlator,
    qubit_index,
)
from .simulate import (
    SparseHamiltonian,
    Statevector,
    exact_evolve,
    run_correlator_experiment,
    simulate,
)
from .entropy import (
    PurityEstimate,
    RMConfig,
    estimate_purity,
    estimate_X,
    exact_purity,
    exact_renyi2,
    sample_su2,
)
from .trotter import (
    TrotterPlan,
    build_evolution,
    build_hop_block,
    build_int_block,
    build_int_ladder,
    build_step_first,
    build_step_second,
    build_xyyx,
    make_plan,
)

__all__ = [name for name in dir() if not name.startswith("_")]
