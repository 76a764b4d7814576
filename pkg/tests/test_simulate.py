"""Statevector simulation, exact evolution, and the correlator driver."""

from __future__ import annotations

import time

import numpy as np
import pytest

from gnsim import (
    LatticeParams,
    Statevector,
    build_evolution,
    build_hamiltonian,
    lower_to_cz,
    make_plan,
)
from gnsim.circuit import Circuit, cphase, cx, pauli_x, phase
from gnsim.model import Hamiltonian, dense_matrix, total_occupation
from gnsim.simulate import (
    SimulationSizeError,
    SparseHamiltonian,
    circuit_unitary,
    default_initial_bits,
    exact_evolve,
    run_correlator_experiment,
    simulate,
)
from gnsim.trotter import build_int_ladder

from oracles import circuit_dense, evolve_dense
from test_circuit import random_circuit


class TestApplyGate:
    def test_x_flips(self):
        sv = Statevector(1).apply(pauli_x(0))
        assert np.allclose(sv.amps, [0, 1])

    def test_cp_phases_11(self):
        sv = Statevector.from_bitstring("11").apply(cphase(0.9, 0, 1))
        assert sv.amps[3] == pytest.approx(np.exp(0.9j), abs=1e-15)

    def test_ladder_phase_on_full_register(self):
        theta = 0.31
        sv = Statevector.from_bitstring("1111").run(build_int_ladder(2, theta))
        assert np.angle(sv.amps[15]) == pytest.approx(-2 * theta, abs=1e-12)

    def test_out_of_range(self):
        with pytest.raises(IndexError):
            Statevector(1).apply(phase(0.1, 1))


class TestSimulate:
    def test_empty_circuit_keeps_basis_state(self):
        sv = simulate(Circuit(3), "010")
        assert sv.amps[2] == 1.0 and np.count_nonzero(sv.amps) == 1

    @pytest.mark.parametrize("seed", range(4))
    def test_lowering_equivalence(self, seed):
        rng = np.random.default_rng(seed)
        width = int(rng.integers(2, 7))
        c = random_circuit(width, 30, rng)
        bits = "".join(rng.choice(["0", "1"], size=width))
        a = simulate(c, bits)
        b = simulate(lower_to_cz(c), bits)
        assert abs(abs(a.overlap(b)) - 1.0) <= 1e-9

    @pytest.mark.parametrize("seed", range(4))
    def test_matches_dense_oracle(self, seed):
        rng = np.random.default_rng(10 + seed)
        width = int(rng.integers(2, 6))
        c = random_circuit(width, 25, rng)
        bits = "".join(rng.choice(["0", "1"], size=width))
        sv = simulate(c, bits)
        index = int(bits[::-1], 2)
        ref = circuit_dense(c)[:, index]
        assert np.max(np.abs(sv.amps - ref)) <= 1e-10

    def test_unitary_builder_matches_dense_oracle(self):
        rng = np.random.default_rng(42)
        c = random_circuit(4, 30, rng)
        assert np.max(np.abs(circuit_unitary(c) - circuit_dense(c))) <= 1e-10

    def test_composition_is_sequential_application(self):
        # simulating a concatenation equals running the parts in sequence
        rng = np.random.default_rng(33)
        a = random_circuit(4, 15, rng)
        b = random_circuit(4, 15, rng)
        joint = simulate(a.concat(b), "0110")
        staged = simulate(a, "0110").run(b)
        assert np.array_equal(joint.amps, staged.amps)

    def test_norm_preserved(self):
        params = LatticeParams(L=6, N=2, g=0.5)
        c = build_evolution(params, make_plan(params, 2.0, 4, "second", "cp"))
        sv = simulate(c, "100110011001")
        assert abs(sv.norm_sq() - 1.0) <= 1e-10

    def test_width_cap(self):
        with pytest.raises(SimulationSizeError):
            Statevector(25)

    def test_one_step_20q_under_a_second(self):
        params = LatticeParams(L=10, N=2, g=0.5)
        c = build_evolution(params, make_plan(params, 0.5, 1))
        bits = default_initial_bits(params)
        simulate(c, bits)  # warm any lazily compiled kernels
        start = time.perf_counter()
        simulate(c, bits)
        assert time.perf_counter() - start < 1.0


class TestNumberConservation:
    @pytest.mark.parametrize("order", ["first", "second", "second_optimized"])
    @pytest.mark.parametrize("ldoa", ["none", "cp", "rzz"])
    def test_total_occupation_invariant(self, order, ldoa):
        params = LatticeParams(L=4, N=2, g=0.5)
        occ = total_occupation(params.n_qubits)
        sv = Statevector.from_bitstring("10011100")
        before = sv.expectation(occ)
        sv.run(build_evolution(params, make_plan(params, 1.5, 3, order, ldoa)))
        assert abs(sv.expectation(occ) - before) <= 1e-8


class TestExactEvolve:
    def test_zero_time_is_identity(self):
        params = LatticeParams(L=4, N=1, g=0.5)
        h = SparseHamiltonian(build_hamiltonian(params))
        sv = Statevector.from_bitstring("1010")
        out = exact_evolve(h, sv, 0.0)
        assert np.array_equal(out.amps, sv.amps)

    def test_single_qubit_precession(self):
        # H = Z on |+>: <X>(t) = cos 2t
        h = Hamiltonian(1)
        h.add(1.0, [(0, "Z")])
        x_obs = Hamiltonian(1)
        x_obs.add(1.0, [(0, "X")])
        plus = Statevector(1, np.array([1.0, 1.0]) / np.sqrt(2.0))
        hs = SparseHamiltonian(h)
        for t in (0.0, 0.3, 1.1):
            out = exact_evolve(hs, plus, t)
            assert out.expectation(x_obs) == pytest.approx(np.cos(2 * t), abs=1e-10)

    def test_matches_dense_eigendecomposition(self):
        params = LatticeParams(L=4, N=2, g=0.5)
        ham = build_hamiltonian(params)
        h = SparseHamiltonian(ham)
        sv = Statevector.from_bitstring("10011100")
        out = exact_evolve(h, sv, 2.3)
        ref = evolve_dense(dense_matrix(ham), sv.amps, 2.3)
        assert np.max(np.abs(out.amps - ref)) <= 1e-9
        assert abs(out.norm_sq() - 1.0) <= 1e-9

    def test_rejects_negative_time(self):
        params = LatticeParams(L=2, N=1, g=0.5)
        h = SparseHamiltonian(build_hamiltonian(params))
        with pytest.raises(ValueError):
            exact_evolve(h, Statevector(2), -1.0)


class TestMarginals:
    def test_marginal_probabilities_match_brute_force(self):
        rng = np.random.default_rng(3)
        amps = rng.standard_normal(32) + 1j * rng.standard_normal(32)
        amps /= np.linalg.norm(amps)
        sv = Statevector(5, amps)
        probs = np.abs(amps) ** 2
        sub = (1, 3)
        got = sv.marginal_probabilities(sub)
        want = np.zeros(4)
        for k in range(32):
            a = ((k >> 1) & 1) | (((k >> 3) & 1) << 1)
            want[a] += probs[k]
        assert np.allclose(got, want, atol=1e-12)


class TestCorrelatorExperiment:
    def test_initial_value(self):
        params = LatticeParams(L=10, N=2, g=0.5)
        plan = make_plan(params, 0.5, 1, "first", "rzz")
        pts = run_correlator_experiment(
            params, plan, 3, 5, [0.0], include_exact=False
        )
        assert pts[0].c_trotter == pytest.approx(1.0, abs=1e-12)

    @pytest.mark.parametrize("order,factor", [("first", 2.0), ("second", 4.0)])
    def test_error_shrinks_with_steps(self, order, factor):
        params = LatticeParams(L=4, N=2, g=0.5)
        errors = []
        for r in (2, 4, 8, 16):
            plan = make_plan(params, 1.0, r, order)
            pts = run_correlator_experiment(
                params, plan, 1, 3, [1.0], initial_bitstring="10011100"
            )
            errors.append(abs(pts[0].c_trotter - pts[0].c_exact))
        for e0, e1 in zip(errors, errors[1:]):
            ratio = e0 / e1
            assert factor / 1.5 <= ratio <= factor * 1.5

    def test_incremental_path_matches_rebuild(self):
        params = LatticeParams(L=4, N=2, g=0.5)
        times = [0.0, 0.5, 1.0]
        plan_first = make_plan(params, 1.0, 2, "first")
        inc = run_correlator_experiment(
            params, plan_first, 1, 3, times, "10011100", include_exact=False
        )
        rebuilt = []
        for t in times:
            if t == 0.0:
                sv = Statevector.from_bitstring("10011100")
            else:
                r = round(t / 0.5)
                sv = simulate(
                    build_evolution(params, make_plan(params, t, r, "first")),
                    "10011100",
                )
            from gnsim.model import density_correlator

            rebuilt.append(sv.expectation(density_correlator(1, 3, params)))
        assert [p.c_trotter for p in inc] == rebuilt  # bit-identical

    def test_unsorted_times_rejected(self):
        params = LatticeParams(L=4, N=2, g=0.5)
        plan = make_plan(params, 1.0, 2)
        with pytest.raises(ValueError):
            run_correlator_experiment(params, plan, 1, 3, [1.0, 0.5])

    def test_size_overflow(self):
        params = LatticeParams(L=54, N=2, g=0.5)
        plan = make_plan(params, 0.5, 1)
        with pytest.raises(SimulationSizeError):
            run_correlator_experiment(params, plan, 25, 27, [0.5])


class TestAgainstExactCurve:
    def test_compressed_trotter_tracks_exact(self, exact20, trotter20_curves):
        for ldoa in ("cp", "rzz"):
            devs = [
                abs(a - b) for a, b in zip(trotter20_curves[ldoa], exact20.correlator)
            ]
            assert max(devs) <= 0.05
