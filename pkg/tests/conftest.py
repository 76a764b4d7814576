"""Shared fixtures.  The 20-qubit reference computations are expensive, so
they are computed once per session and shared between the unit tests and the
acceptance suite."""

from __future__ import annotations

import sys
from dataclasses import dataclass
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from gnsim import (
    LatticeParams,
    Statevector,
    build_evolution,
    build_hamiltonian,
    make_plan,
)
from gnsim.simulate import (
    SparseHamiltonian,
    default_initial_bits,
    exact_evolve,
    run_correlator_experiment,
)

TIME_GRID = [0.5 * k for k in range(9)]


@pytest.fixture(scope="session")
def params20() -> LatticeParams:
    return LatticeParams(L=10, N=2, g=0.5)


@dataclass(frozen=True)
class ExactReference:
    times: list[float]
    correlator: list[float]
    state_t4: Statevector


@pytest.fixture(scope="session")
def exact20(params20) -> ExactReference:
    """Krylov-evolved 20-qubit reference: correlator on the 0..4 grid and the
    final state at t = 4."""
    from gnsim.model import density_correlator

    h = SparseHamiltonian(build_hamiltonian(params20))
    obs = density_correlator(3, 5, params20)
    psi = Statevector.from_bitstring(default_initial_bits(params20))
    values = []
    prev = 0.0
    for t in TIME_GRID:
        psi = exact_evolve(h, psi, t - prev)
        prev = t
        values.append(psi.expectation(obs))
    return ExactReference(times=TIME_GRID, correlator=values, state_t4=psi)


@pytest.fixture(scope="session")
def trotter20_curves(params20):
    """Noiseless Trotter correlator curves (no exact column) on the grid,
    for mode none and both compressed interaction modes."""
    curves = {}
    for ldoa in ("none", "cp", "rzz"):
        plan = make_plan(params20, 4.0, 8, "first", ldoa)
        pts = run_correlator_experiment(
            params20, plan, 3, 5, TIME_GRID, include_exact=False
        )
        curves[ldoa] = [p.c_trotter for p in pts]
    return curves


@pytest.fixture(scope="session")
def trotter20_state_t4(params20) -> Statevector:
    """State after the r = 8 merged-boundary symmetric circuit at t = 4."""
    plan = make_plan(params20, 4.0, 8, "second_optimized", "none")
    circ = build_evolution(params20, plan)
    sv = Statevector.from_bitstring(default_initial_bits(params20))
    return sv.run(circ)


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    from acceptance_report import RESULTS

    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in RESULTS:
            terminalreporter.write_line(line)
