"""Diagonal-block compression: phase extraction, least squares, residuals."""

from __future__ import annotations

from fractions import Fraction

import numpy as np
import pytest

from gnsim.circuit import Circuit, cphase, rx, rzz, swap
from gnsim.ldoa import (
    AnsatzTemplate,
    NonDiagonalCircuitError,
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
from gnsim.trotter import build_int_ladder

# Two-flavor target diagonal of the CP + SWAP ladder, little-endian indexing:
# entries 3 and 12 carry +theta, 15 carries -2 theta, and eight entries -theta.
TARGET_PHASES_2F = np.array(
    [0, 0, 0, 1, 0, -1, -1, -1, 0, -1, -1, -1, 1, -1, -1, -2], dtype=float
)

# Analytic optima for the six flavor/gate-kind combinations, as exact
# fractions of theta_g.
ANALYTIC_X = {
    (2, "CP"): ("-1/6", "-1/6", "-13/12"),
    (2, "RZZ"): ("-1/2", "-1/2", "1/2"),
    (3, "CP"): ("-11/19", "-24/19", "-11/19", "1/19", "1/19"),
    (3, "RZZ"): ("-1/2", "1/2", "-1/2", "-1/2", "-1/2"),
    (4, "CP"): ("-55/118", "-3/59", "-3/59", "-55/118", "-26/59", "-147/118", "-26/59"),
    (4, "RZZ"): ("-1/2", "-1/2", "-1/2", "-1/2", "-1/2", "1/2", "-1/2"),
}

# Published 11x3 system of the two-flavor CP fit.
A_2F = np.array(
    [
        [1, 0, 0],
        [0, 0, 0],
        [0, 0, 1],
        [1, 0, 1],
        [0, 0, 0],
        [0, 0, 0],
        [1, 0, 0],
        [0, 1, 0],
        [0, 1, 0],
        [0, 1, 1],
        [1, 1, 1],
    ],
    dtype=float,
)
B_2F = np.array([1, -1, -1, -1, -1, -1, -1, 1, -1, -1, -2], dtype=float)
APLUS_2F = np.array(
    [
        [2, 0, -1, 1, 0, 0, 2, 0, 0, -1, 1],
        [0, 0, -1, -1, 0, 0, 0, 2, 2, 1, 1],
        [-1, 0, 2.5, 1.5, 0, 0, -1, -1, -1, 1.5, 0.5],
    ]
) / 6.0


def analytic_vector(N: int, kind: str, theta: float) -> np.ndarray:
    return np.array([float(Fraction(f)) * theta for f in ANALYTIC_X[(N, kind)]])


class TestPhaseExtraction:
    def test_empty_circuit(self):
        pv = diagonal_phase_of_circuit(Circuit(3))
        assert np.array_equal(pv.phases, np.zeros(8))

    def test_single_cp(self):
        pv = diagonal_phase_of_circuit(Circuit(2, [cphase(0.7, 0, 1)]))
        assert np.array_equal(pv.phases, [0, 0, 0, 0.7])

    def test_two_flavor_ladder_target(self):
        theta = 0.37
        pv = diagonal_phase_of_circuit(build_int_ladder(2, theta))
        assert np.allclose(pv.phases, theta * TARGET_PHASES_2F, atol=1e-15)

    def test_non_diagonal_gate_rejected(self):
        circ = Circuit(2, [cphase(0.1, 0, 1), rx(0.3, 0)])
        with pytest.raises(NonDiagonalCircuitError) as err:
            diagonal_phase_of_circuit(circ)
        assert err.value.gate_index == 1

    def test_unpaired_swap_rejected(self):
        circ = Circuit(3, [swap(0, 1), cphase(0.1, 1, 2)])
        with pytest.raises(NonDiagonalCircuitError):
            diagonal_phase_of_circuit(circ)

    def test_raw_phases_not_reduced(self):
        circ = Circuit(2, [cphase(5.0, 0, 1), cphase(5.0, 0, 1)])
        pv = diagonal_phase_of_circuit(circ)
        assert pv.phases[3] == 10.0
        reduced = pv.reduced().phases[3]
        assert -np.pi < reduced <= np.pi
        assert np.isclose(np.exp(1j * reduced), np.exp(10j))


class TestAnsatzPhaseMap:
    def test_cp_rows(self):
        m = ansatz_phase_map(flavor_template(2, "CP"))
        assert m.shape == (16, 3)
        assert np.array_equal(m[3], [1, 0, 0])
        assert np.array_equal(m[6], [0, 0, 1])
        assert np.array_equal(m[12], [0, 1, 0])
        assert np.array_equal(m[15], [1, 1, 1])

    def test_zero_parameters_zero_phases(self):
        m = ansatz_phase_map(flavor_template(3, "RZZ"))
        assert np.array_equal(m @ np.zeros(5), np.zeros(64))

    def test_rzz_row_zero(self):
        m = ansatz_phase_map(flavor_template(2, "RZZ"))
        assert np.array_equal(m[0], [-0.5, -0.5, -0.5])

    def test_template_validation(self):
        with pytest.raises(ValueError):
            AnsatzTemplate(4, (("CP", 0, 2, 0),), 1)  # not nearest-neighbor
        with pytest.raises(ValueError):
            AnsatzTemplate(4, (("CP", 0, 1, 0),), 2)  # parameter 1 unused
        assert flavor_template(3, "CP").m == 5


class TestAssemble:
    def test_two_flavor_system_matches_published_values(self):
        theta = 1.0
        target = diagonal_phase_of_circuit(build_int_ladder(2, theta))
        system = assemble_system(target, flavor_template(2, "CP"))
        assert np.array_equal(system.A, A_2F)
        assert np.array_equal(system.b, theta * B_2F)
        assert np.array_equal(
            system.row_index_map, [3, 5, 6, 7, 9, 10, 11, 12, 13, 14, 15]
        )

    def test_zero_target(self):
        target = PhaseVector(4, np.zeros(16))
        system = assemble_system(target, flavor_template(2, "CP"))
        sol = pseudoinverse_solve(system)
        assert np.array_equal(sol.x, np.zeros(3))
        assert np.linalg.norm(system.b) == 0.0

    def test_three_flavor_system_solvable(self):
        target = diagonal_phase_of_circuit(build_int_ladder(3, 0.5))
        system = assemble_system(target, flavor_template(3, "CP"))
        assert system.A.shape[1] == 5
        sol = pseudoinverse_solve(system)
        assert np.allclose(sol.x, analytic_vector(3, "CP", 0.5), atol=1e-12)

    def test_rzz_keeps_all_rows(self):
        target = diagonal_phase_of_circuit(build_int_ladder(2, 1.0))
        system = assemble_system(target, flavor_template(2, "RZZ"))
        assert system.A.shape == (16, 3)


class TestPseudoinverse:
    def test_identity(self):
        assert np.allclose(pseudoinverse(np.eye(3)), np.eye(3), atol=1e-14)

    def test_rank_one(self):
        a = np.ones((2, 2))
        assert np.allclose(pseudoinverse(a), np.full((2, 2), 0.25), atol=1e-12)

    def test_published_two_flavor_pseudoinverse(self):
        assert np.max(np.abs(pseudoinverse(A_2F) - APLUS_2F)) <= 1e-12

    @pytest.mark.parametrize("seed", range(4))
    def test_moore_penrose_conditions(self, seed):
        rng = np.random.default_rng(seed)
        a = rng.standard_normal((7, 3))
        if seed % 2:
            a[:, 2] = a[:, 0] + a[:, 1]  # rank-deficient
        ap = pseudoinverse(a)
        assert np.max(np.abs(a @ ap @ a - a)) <= 1e-10
        assert np.max(np.abs(ap @ a @ ap - ap)) <= 1e-10
        assert np.max(np.abs((a @ ap).T - a @ ap)) <= 1e-10
        assert np.max(np.abs((ap @ a).T - ap @ a)) <= 1e-10


class TestSolve:
    @pytest.mark.parametrize("N,kind", list(ANALYTIC_X))
    @pytest.mark.parametrize("theta", [0.1, 0.5, 1.0])
    def test_analytic_optima(self, N, kind, theta):
        target = diagonal_phase_of_circuit(build_int_ladder(N, theta))
        sol = solve_ansatz(target, flavor_template(N, kind))
        assert np.max(np.abs(sol.x - analytic_vector(N, kind, theta))) <= 1e-12

    @pytest.mark.parametrize("N,kind", list(ANALYTIC_X))
    def test_normal_equation_orthogonality(self, N, kind):
        target = diagonal_phase_of_circuit(build_int_ladder(N, 0.8))
        system = assemble_system(target, flavor_template(N, kind))
        sol = pseudoinverse_solve(system)
        resid = system.b - system.A @ sol.x
        assert np.linalg.norm(system.A.T @ resid) <= 1e-10 * max(
            1.0, np.linalg.norm(system.b)
        )

    def test_parameter_linearity(self):
        def solve_at(theta):
            target = diagonal_phase_of_circuit(build_int_ladder(2, theta))
            return solve_ansatz(target, flavor_template(2, "CP")).x

        x1 = solve_at(0.3)
        assert np.array_equal(solve_at(0.6), 2.0 * x1)  # doubling is exact
        assert np.allclose(solve_at(0.9), 3.0 * x1, rtol=1e-13, atol=1e-16)


# Closed-form squared residual of the two-flavor CP fit.
def cp_norm_sq(t):
    return (
        22
        - 2 * np.cos(t / 12)
        - 4 * np.cos(t / 4)
        - 2 * np.cos(7 * t / 12)
        - 4 * np.cos(5 * t / 6)
        - 6 * np.cos(t)
        - 4 * np.cos(7 * t / 6)
    )


# Closed-form squared residual of the two-flavor RZZ fit, derived from the
# exact phase-mismatch multiset of the analytic optimum: |delta| = theta/4 on
# nine basis states, 3 theta/4 on four, 5 theta/4 on two, and 9 theta/4 on one
# (sum over 2 - 2 cos(delta_k); independently cross-checked numerically).
def rzz_norm_sq(t):
    return (
        32
        - 18 * np.cos(t / 4)
        - 8 * np.cos(3 * t / 4)
        - 4 * np.cos(5 * t / 4)
        - 2 * np.cos(9 * t / 4)
    )


class TestResidualNorm:
    def test_zero_angle(self):
        target = diagonal_phase_of_circuit(build_int_ladder(2, 0.0))
        template = flavor_template(2, "CP")
        assert residual_unitary_norm(target, template, np.zeros(3)) == 0.0

    @pytest.mark.parametrize(
        "kind,formula", [("CP", cp_norm_sq), ("RZZ", rzz_norm_sq)]
    )
    def test_closed_form_agreement(self, kind, formula):
        template = flavor_template(2, kind)
        for theta in np.linspace(0.0, np.pi / 2, 101):
            target = diagonal_phase_of_circuit(build_int_ladder(2, theta))
            x = analytic_vector(2, kind, theta)
            norm = residual_unitary_norm(target, template, x)
            assert abs(norm**2 - formula(theta)) <= 1e-9

    def test_solution_residual_fields(self):
        theta = 0.6
        target = diagonal_phase_of_circuit(build_int_ladder(2, theta))
        system = assemble_system(target, flavor_template(2, "CP"))
        sol = pseudoinverse_solve(system)
        direct = residual_unitary_norm(target, flavor_template(2, "CP"), sol.x)
        assert sol.residual_unitary_norm == pytest.approx(direct, abs=1e-12)
        assert sol.residual_phase_norm == pytest.approx(
            np.linalg.norm(system.b - system.A @ sol.x), abs=1e-14
        )

    @pytest.mark.parametrize("kind", ["CP", "RZZ"])
    def test_small_angle_linear_vanishing(self, kind):
        template = flavor_template(2, kind)
        ratios = []
        for theta in (1e-2, 1e-3, 1e-4):
            target = diagonal_phase_of_circuit(build_int_ladder(2, theta))
            sol = solve_ansatz(target, template)
            ratios.append(sol.residual_unitary_norm / theta)
        assert abs(ratios[1] / ratios[0] - 1) < 0.01
        assert abs(ratios[2] / ratios[1] - 1) < 0.01


class TestBlockLocality:
    def test_solved_block_reused_across_lattice_sizes(self):
        from gnsim import LatticeParams, build_evolution, make_plan
        from gnsim.trotter import interaction_ansatz_unit

        interaction_ansatz_unit.cache_clear()
        for L in (10, 54):
            params = LatticeParams(L=L, N=2, g=0.5)
            build_evolution(params, make_plan(params, 0.5, 1, "first", "rzz"))
        info = interaction_ansatz_unit.cache_info()
        assert info.misses == 1 and info.hits >= 1

    def test_blocks_identical_at_all_offsets(self):
        from gnsim import LatticeParams, build_evolution, make_plan

        params = LatticeParams(L=8, N=2, g=0.5)
        circ = build_evolution(params, make_plan(params, 0.5, 1, "first", "cp"))
        by_base = {}
        for g in circ.gates:
            if g.kind == "CP":
                base = (min(g.qubits) // 4) * 4
                by_base.setdefault(base, []).append(
                    (g.angle, tuple(q - base for q in g.qubits))
                )
        blocks = list(by_base.values())
        assert len(blocks) == 4
        assert all(b == blocks[0] for b in blocks)


class TestCustomTemplate:
    def test_arbitrary_template_through_pipeline(self):
        # a single middle-pair gate can only pick up part of the target
        template = AnsatzTemplate(4, (("CP", 1, 2, 0),), 1)
        target = diagonal_phase_of_circuit(build_int_ladder(2, 0.5))
        sol = solve_ansatz(target, template)
        assert sol.x.shape == (1,)
        assert sol.residual_unitary_norm > 0
