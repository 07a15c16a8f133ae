import numpy as np
import pytest
import scipy.linalg

from pwdual.fermion import FermionOperator, fermion_matrix
from pwdual.geometry import build_grid
from pwdual.hamiltonian import build_dual, build_qubit, HamiltonianSet, DUAL
from pwdual.pauli import QubitOperator, string_matrix, qubit_operator_matrix
from pwdual.statevector import Circuit, circuit_matrix, Statevector, \
    apply_circuit, expectation
from pwdual.trotter import TrotterConfig, split_operator_step, \
    direct_jw_step, measure_error_scaling, estimate_r, trotter_circuit, \
    hopping_template_gates, group_qubit_terms, _zz_gates


def spinful_jellium(omega=4.0):
    return build_dual(build_grid(1, 2, omega, spinful=True))


def exact_unitary(hs, t):
    h = hs.matrix()
    vals, vecs = np.linalg.eigh(h)
    return vecs @ np.diag(np.exp(-1j * vals * t)) @ vecs.conj().T


class TestSplitOperatorStep:
    def test_matches_symmetric_product(self):
        hs = spinful_jellium()
        n = hs.n_qubits
        tau = 0.3
        t_mat = fermion_matrix(hs.kinetic, n)
        uv = fermion_matrix(hs.external + hs.interaction, n)
        sym = scipy.linalg.expm(-1j * uv * tau / 2) \
            @ scipy.linalg.expm(-1j * t_mat * tau) \
            @ scipy.linalg.expm(-1j * uv * tau / 2)
        step = circuit_matrix(split_operator_step(hs, tau))
        assert np.max(np.abs(step - sym)) < 1e-10

    def test_free_theory_exact_for_any_tau(self):
        grid = build_grid(1, 4, 4.0)
        hs = build_dual(grid)
        free = HamiltonianSet(hs.kinetic, FermionOperator(),
                              FermionOperator(), 0.0, DUAL, grid,
                              grid.n_qubits)
        tau = 1.7
        step = circuit_matrix(split_operator_step(free, tau))
        assert np.max(np.abs(step - exact_unitary(free, tau))) < 1e-10

    def test_tau_zero_is_identity(self):
        hs = spinful_jellium()
        step = circuit_matrix(split_operator_step(hs, 0.0))
        assert np.max(np.abs(step - np.eye(step.shape[0]))) < 1e-10

    def test_single_step_error_cubic(self):
        hs = spinful_jellium()
        errs = []
        for tau in (0.2, 0.1, 0.05):
            step = circuit_matrix(split_operator_step(hs, tau))
            errs.append(np.linalg.norm(step - exact_unitary(hs, tau), 2))
        # each halving of tau should shrink the error by about 8
        assert errs[0] / errs[1] > 5
        assert errs[1] / errs[2] > 5

    def test_rejects_plane_wave_representation(self):
        from pwdual.hamiltonian import build_plane_wave
        hs = build_plane_wave(build_grid(1, 2, 4.0))
        with pytest.raises(ValueError):
            split_operator_step(hs, 0.1)

    def test_planar_lowering_exact(self):
        hs = spinful_jellium()
        tau = 0.27
        dense = circuit_matrix(split_operator_step(hs, tau))
        planar = split_operator_step(hs, tau, connectivity=("planar", 2, 2))
        planar.check_connectivity()
        assert np.max(np.abs(circuit_matrix(planar) - dense)) < 1e-10


class TestDirectJwStep:
    def test_single_zz_term(self):
        h = QubitOperator()
        h.terms[((0, "Z"), (1, "Z"))] = 0.4
        tau = 0.9
        circ = direct_jw_step(h, tau, n_qubits=2)
        kinds = [g.kind for g in circ.gates]
        assert kinds.count("CNOT") == 4 and kinds.count("RZ") == 2
        target = scipy.linalg.expm(
            -1j * tau * qubit_operator_matrix(h, 2))
        assert np.max(np.abs(circuit_matrix(circ) - target)) < 1e-10

    def test_hopping_template_q_p_plus_3(self):
        p, q, theta = 0, 3, 0.41
        hx = string_matrix(((p, "X"), (1, "Z"), (2, "Z"), (q, "X")), 4)
        hy = string_matrix(((p, "Y"), (1, "Z"), (2, "Z"), (q, "Y")), 4)
        target = scipy.linalg.expm(-1j * theta * (hx + hy))
        circ = Circuit(4)
        circ.extend(hopping_template_gates(p, q, theta))
        assert np.max(np.abs(circuit_matrix(circ) - target)) < 1e-10

    def test_matches_ordered_exponential(self):
        hs = spinful_jellium()
        op = build_qubit(hs)
        n = hs.n_qubits
        tau = 0.3
        identity, zs, zzs, hops = group_qubit_terms(op)
        factors = []
        for q, c in zs:
            factors.append(c * string_matrix(((q, "Z"),), n))
        from pwdual.trotter import _zz_rounds
        for rnd in _zz_rounds(zzs):
            for (a, b), c in rnd:
                factors.append(c * string_matrix(((a, "Z"), (b, "Z")), n))
        for (p, q), c in hops:
            mid = tuple((i, "Z") for i in range(p + 1, q))
            mx = string_matrix(((p, "X"),) + mid + ((q, "X"),), n)
            my = string_matrix(((p, "Y"),) + mid + ((q, "Y"),), n)
            factors.append(c * (mx + my))
        fwd = np.eye(2 ** n, dtype=complex)
        for f in factors:
            fwd = fwd @ scipy.linalg.expm(-1j * f * tau / 2)
        rev = np.eye(2 ** n, dtype=complex)
        for f in reversed(factors):
            rev = rev @ scipy.linalg.expm(-1j * f * tau / 2)
        target = np.exp(-1j * identity * tau) * (fwd @ rev)
        built = circuit_matrix(direct_jw_step(op, tau, n_qubits=n))
        assert np.max(np.abs(built - target)) < 1e-10

    def test_diagonal_hamiltonian_zero_error(self):
        h = QubitOperator()
        h.terms[((0, "Z"),)] = 0.3
        h.terms[((0, "Z"), (1, "Z"))] = -0.7
        h.terms[((1, "Z"), (2, "Z"))] = 0.2
        t = 1.4
        target = scipy.linalg.expm(-1j * t * qubit_operator_matrix(h, 3))
        built = circuit_matrix(direct_jw_step(h, t, n_qubits=3))
        assert np.max(np.abs(built - target)) < 1e-12

    def test_rejects_unsupported_pattern(self):
        h = QubitOperator()
        h.terms[((0, "X"), (1, "X"), (2, "X"))] = 1.0
        with pytest.raises(ValueError):
            direct_jw_step(h, 0.1, n_qubits=3)


class TestErrorScaling:
    def test_second_order_slope(self):
        hs = spinful_jellium()
        exact = exact_unitary(hs, 1.0)
        rows, slope = measure_error_scaling(
            lambda tau: circuit_matrix(split_operator_step(hs, tau)),
            exact, [2, 4, 8, 16, 32], 1.0)
        assert slope == pytest.approx(-2.0, abs=0.1)

    def test_first_order_slope(self):
        hs = spinful_jellium()
        exact = exact_unitary(hs, 1.0)
        rows, slope = measure_error_scaling(
            lambda tau: circuit_matrix(split_operator_step(hs, tau, order=1)),
            exact, [4, 8, 16, 32, 64], 1.0)
        assert slope == pytest.approx(-1.0, abs=0.1)

    def test_convergence_with_r(self):
        hs = spinful_jellium()
        exact = exact_unitary(hs, 1.0)
        rows, _ = measure_error_scaling(
            lambda tau: circuit_matrix(split_operator_step(hs, tau)),
            exact, [4, 64], 1.0)
        errs = dict(rows)
        assert errs[64] < errs[4] / 100

    def test_diagonal_only_zero_error(self):
        grid = build_grid(1, 4, 4.0)
        full = build_dual(grid)
        diag = HamiltonianSet(FermionOperator(), full.external,
                              full.interaction, 0.0, DUAL, grid,
                              grid.n_qubits)
        exact = exact_unitary(diag, 1.0)
        rows, _ = measure_error_scaling(
            lambda tau: circuit_matrix(split_operator_step(diag, tau)),
            exact, [1], 1.0)
        assert rows[0][1] < 1e-12


class TestEstimateR:
    def test_time_homogeneity(self):
        base = estimate_r(2, 8, 4.0, 1.0, 1e-4)
        assert estimate_r(2, 8, 4.0, 4.0, 1e-4) == pytest.approx(8 * base,
                                                                 rel=0.01)

    def test_error_homogeneity(self):
        base = estimate_r(2, 8, 4.0, 1.0, 1e-4)
        assert estimate_r(2, 8, 4.0, 1.0, 2.5e-5) == pytest.approx(2 * base,
                                                                   rel=0.01)

    def test_frozen_reference_value(self):
        # eta^2 t^{3/2} / sqrt(eps) * (N/Omega)^{5/6} * sqrt(1 + eta (O/N)^{1/3})
        # = 4 / sqrt(1e-3) * 1 * sqrt(3) = 219.09..., ceil -> 220
        assert estimate_r(2, 4, 4.0, 1.0, 1e-3) == 220

    def test_floor_is_one(self):
        assert estimate_r(1, 2, 1.0, 1e-6, 1.0) == 1

    def test_rejects_nonpositive(self):
        with pytest.raises(ValueError):
            estimate_r(2, 4, 4.0, -1.0, 1e-3)


class TestFullEvolution:
    def test_energy_conservation(self):
        hs = spinful_jellium()
        n = hs.n_qubits
        h_op = build_qubit(hs)
        t = 1.0
        r = 8
        config = TrotterConfig(r=r, t=t)
        circ = trotter_circuit(hs, config)
        rng = np.random.default_rng(31)
        amps = rng.normal(size=2 ** n) + 1j * rng.normal(size=2 ** n)
        amps /= np.linalg.norm(amps)
        psi0 = Statevector(n, amps)
        psi1 = apply_circuit(psi0, circ)
        e0 = expectation(psi0, h_op)
        e1 = expectation(psi1, h_op)
        err_op = np.linalg.norm(
            circuit_matrix(circ) - exact_unitary(hs, t), 2)
        h_norm = np.linalg.norm(hs.matrix(), 2)
        assert abs(e1 - e0) < 10 * err_op * h_norm

    @pytest.mark.parametrize("strategy", ["split_operator", "direct_jw"])
    def test_both_strategies_converge_hundredfold(self, strategy):
        hs = spinful_jellium()
        exact = exact_unitary(hs, 1.0)
        errs = {}
        for r in (4, 64):
            circ = trotter_circuit(hs, TrotterConfig(strategy=strategy,
                                                     r=r, t=1.0))
            errs[r] = np.linalg.norm(circuit_matrix(circ) - exact, 2)
        assert errs[64] < errs[4] / 100

    def test_config_validation(self):
        with pytest.raises(ValueError):
            TrotterConfig(strategy="magic")
        with pytest.raises(ValueError):
            TrotterConfig(order=3)
        with pytest.raises(ValueError):
            TrotterConfig(r=0)


class TestDepthAudit:
    def test_planar_step_depth_linear(self):
        ratios = {}
        for m_modes, rows, cols in [(4, 2, 2), (16, 4, 4), (64, 8, 8)]:
            grid = build_grid(1, m_modes, float(m_modes))
            hs = build_dual(grid)
            step = split_operator_step(hs, 0.1,
                                       connectivity=("planar", rows, cols))
            ratios[m_modes] = step.depth() / m_modes
        assert max(ratios.values()) < 20
