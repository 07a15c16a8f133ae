"""Fermionic fast Fourier transform circuits.

The emitted circuit C satisfies, for every mode nu with slot j,

    C^dag a^dag_{slot j} C = (1/sqrt(N)) sum_p a^dag_p e^{-i k_nu . r_p},

i.e. conjugation by C turns the local ladder operator at slot j into the
momentum-mode combination. Construction is radix-2 decimation in time:
adjacent-transposition fermionic-swap sorts separate even and odd samples,
recursion transforms the halves, a riffle brings butterfly partners
adjacent, one layer of twiddled butterflies combines them, and a final sort
restores mode order. All two-qubit gates act on chain-adjacent orbitals, so
the circuit is legal on a planar lattice routed along a boustrophedon path.

Spinful registers are handled by fermionic-sorting the interleaved qubits
into spin blocks, transforming each block, and sorting back.
"""

from __future__ import annotations

import numpy as np

from .geometry import ModeGrid
from .statevector import Circuit, Gate, fk_gate


def _is_power_of_two(m: int) -> bool:
    return m >= 1 and (m & (m - 1)) == 0


def _sort_layers(current, target, swap_pairs_sink=None):
    """Odd-even transposition sort from ``current`` label order to ``target``
    order; returns the adjacent-transposition layers (lists of positions)."""
    rank = {label: i for i, label in enumerate(target)}
    arr = [rank[label] for label in current]
    n = len(arr)
    layers = []
    parity = 0
    # oblivious odd-even sort: at most n phases
    for _ in range(n):
        layer = []
        for i in range(parity, n - 1, 2):
            if arr[i] > arr[i + 1]:
                arr[i], arr[i + 1] = arr[i + 1], arr[i]
                layer.append(i)
        if layer:
            layers.append(layer)
        parity ^= 1
        if arr == sorted(arr):
            break
    return layers


def _fswap_sort(circuit_ops, positions, current, target):
    """Emit fermionic swaps realizing the permutation; updates ``current`` in
    place. ``positions`` maps local slot -> qubit."""
    for layer in _sort_layers(list(current), target):
        for i in layer:
            circuit_ops.append(Gate("FSWAP", (positions[i], positions[i + 1])))
            current[i], current[i + 1] = current[i + 1], current[i]


def _ffft_1d_ops(positions, m_total=None):
    """Gate list (application order) for one 1D transform over ``positions``.

    Steps follow the decimation data flow: even/odd sort, half transforms,
    riffle, butterfly layer, output sort. The single-particle matrices of
    the steps then compose right-to-left into the mode transform.
    """
    m = len(positions)
    if m_total is None:
        m_total = m
    if m == 1:
        return []
    ops = []
    labels = list(range(m))
    # separate even samples to the left half, odd to the right
    _fswap_sort(ops, positions, labels,
                list(range(0, m, 2)) + list(range(1, m, 2)))
    ops += _ffft_1d_ops(positions[: m // 2], m)
    ops += _ffft_1d_ops(positions[m // 2:], m)
    # riffle: [E0..E_{m/2-1}, O0..O_{m/2-1}] -> [E0, O0, E1, O1, ...]
    labels = list(range(m))
    riffle = [x for j in range(m // 2) for x in (j, m // 2 + j)]
    _fswap_sort(ops, positions, labels, riffle)
    # one butterfly layer: pair (2j, 2j+1) combines E_j with O_j
    for j in range(m // 2):
        ops.append(fk_gate(j, m, positions[2 * j], positions[2 * j + 1]))
    # outputs sit as [c_0, c_{m/2}, c_1, c_{1+m/2}, ...]; restore mode order
    labels = [x for j in range(m // 2) for x in (j, m // 2 + j)]
    _fswap_sort(ops, positions, labels, list(range(m)))
    return ops


def _axis_permutation_ops(grid: ModeGrid, positions, axis):
    """Fermionic sort bringing ``axis`` to the fastest-varying slot position.

    Returns (ops, inverse_ops) as application-order gate lists.
    """
    d = grid.dimension
    sites = grid.site_vectors()
    axes = [a for a in range(d) if a != axis] + [axis]

    def permuted_index(p):
        idx = 0
        for a in axes:
            idx = idx * grid.modes_per_axis + p[a]
        return idx

    target = sorted(range(len(sites)), key=lambda i: permuted_index(sites[i]))
    ops = []
    current = list(range(len(sites)))
    _fswap_sort(ops, positions, current, target)
    inverse = [g for g in reversed(ops)]  # fswaps are self-inverse
    return ops, inverse, target


def build_ffft_1d(m: int, connectivity=None) -> Circuit:
    """1D transform circuit on m spinless orbitals (m a power of two)."""
    if not _is_power_of_two(m) or m < 2:
        raise ValueError(f"mode count must be a power of two >= 2, got {m}")
    circ = Circuit(m, connectivity=connectivity)
    circ.extend(_ffft_1d_ops(list(range(m))))
    if connectivity is not None:
        circ.check_connectivity()
    return circ


def _spin_block_sort(n_spatial):
    """Fswaps (application order) from interleaved (0u,0d,1u,1d,...) to
    blocked (all up, then all down), plus the inverse."""
    ops = []
    current = list(range(2 * n_spatial))
    # target label at blocked position i: up-orbital i for i < n, else down
    target = [2 * i for i in range(n_spatial)] + \
             [2 * i + 1 for i in range(n_spatial)]
    _fswap_sort(ops, list(range(2 * n_spatial)), current, target)
    inverse = [g for g in reversed(ops)]
    return ops, inverse


def build_ffft_nd(grid: ModeGrid, connectivity=None) -> Circuit:
    """Axis-by-axis transform on a d-dimensional grid, with fermionic-swap
    relabelings between axes; spinful grids transform each spin sector."""
    m = grid.modes_per_axis
    if not _is_power_of_two(m):
        raise ValueError(f"modes per axis must be a power of two, got {m}")
    n_spatial = grid.n_spatial
    ops = []

    def spatial_ops(offset):
        """Gates for one spin sector occupying positions
        [offset, offset + n_spatial)."""
        sector = []
        positions = list(range(offset, offset + n_spatial))
        d = grid.dimension
        for axis in range(d - 1, -1, -1):
            if axis == d - 1:
                # last axis is contiguous in lexicographic order
                for run in range(0, n_spatial, m):
                    sector += _ffft_1d_ops(positions[run:run + m])
            else:
                fwd, inv, perm = _axis_permutation_ops(grid, positions, axis)
                sector += fwd
                for run in range(0, n_spatial, m):
                    sector += _ffft_1d_ops(positions[run:run + m])
                sector += inv
        return sector

    if grid.cell.spinful:
        to_blocks, from_blocks = _spin_block_sort(n_spatial)
        ops += to_blocks
        ops += spatial_ops(0)
        ops += spatial_ops(n_spatial)
        ops += from_blocks
    else:
        ops += spatial_ops(0)

    circ = Circuit(grid.n_qubits, connectivity=connectivity)
    circ.extend(ops)
    if connectivity is not None:
        circ.check_connectivity()
    return circ


def mode_ladder_operator(grid: ModeGrid, nu, spin=None):
    """(1/sqrt(N)) sum_p a^dag_p e^{-i k_nu . r_p} as a FermionOperator."""
    from .fermion import FermionOperator
    op = FermionOperator()
    k = grid.k_vector(nu)
    norm = 1.0 / np.sqrt(grid.n_spatial)
    for p in grid.site_vectors():
        phase = np.exp(-1j * float(k @ grid.r_vector(p)))
        op += FermionOperator.raising(grid.qubit_index(p, spin), norm * phase)
    return op


def single_particle_transform(circuit: Circuit, n_orbitals: int) -> np.ndarray:
    """Matrix W with C^dag a^dag_p C = sum_q W[p, q] a^dag_q, extracted from
    the circuit matrix; verification helper for number-conserving circuits."""
    from .fermion import FermionOperator, fermion_matrix
    from .statevector import circuit_matrix
    u = circuit_matrix(circuit)
    w = np.zeros((n_orbitals, n_orbitals), dtype=complex)
    vac = np.zeros(2 ** n_orbitals, dtype=complex)
    vac[0] = 1.0
    for p in range(n_orbitals):
        adag = fermion_matrix(FermionOperator.raising(p), n_orbitals)
        vec = u.conj().T @ adag @ u @ vac
        for q in range(n_orbitals):
            w[p, q] = vec[1 << q]
    return w


def stage_listing(circuit: Circuit):
    """JSON-compatible summary of the circuit's alternating structure:
    runs of fermionic swaps (sorting stages) and butterfly layers, with the
    overall gate count and greedy depth; intended for depth audits."""
    stages = []
    current = None
    for g in circuit.gates:
        kind = "butterfly" if g.kind == "FK" else "swap_sort"
        if current is None or current["stage"] != kind:
            current = {"stage": kind, "gates": 0}
            if kind == "butterfly":
                current["pairs"] = []
            stages.append(current)
        current["gates"] += 1
        if kind == "butterfly":
            current["pairs"].append([g.targets[0], g.targets[1],
                                     float(g.angle)])
    return {
        "stages": stages,
        "gate_count": circuit.gate_count(),
        "depth": circuit.depth(),
    }


def fswap_properties_report(theta_values=(0.0, np.pi / 8, np.pi / 4, 1.0)):
    """Matrix-level check of the defining fermionic-swap identities.

    Asserts, on a 2-orbital register: Hermiticity, unitarity, involution,
    ladder exchange under conjugation, and the partial-swap conjugation
    formula for each theta. Returns a dict of maximum deviations.
    """
    from .fermion import FermionOperator, fermion_matrix
    from .statevector import Statevector, apply_gate

    f = np.zeros((4, 4), dtype=complex)
    for idx in range(4):
        out = apply_gate(Statevector.basis_state(2, idx), Gate("FSWAP", (0, 1)))
        f[:, idx] = out.amplitudes
    adag_p = fermion_matrix(FermionOperator.raising(0), 2)
    adag_q = fermion_matrix(FermionOperator.raising(1), 2)
    eye = np.eye(4)

    report = {
        "hermitian": float(np.max(np.abs(f - f.conj().T))),
        "unitary": float(np.max(np.abs(f @ f.conj().T - eye))),
        "involution": float(np.max(np.abs(f @ f - eye))),
        "exchange_p": float(np.max(np.abs(f @ adag_p @ f - adag_q))),
        "exchange_q": float(np.max(np.abs(f @ adag_q @ f - adag_p))),
    }
    for theta in theta_values:
        ef = np.cos(theta) * eye + 1j * np.sin(theta) * f
        lhs = ef @ adag_p @ ef.conj().T
        rhs = 0.5 * (np.exp(-2j * theta) * (adag_p - adag_q)
                     + (adag_p + adag_q))
        report[f"partial_swap_theta_{theta:.6g}"] = \
            float(np.max(np.abs(lhs - rhs)))
    return report
