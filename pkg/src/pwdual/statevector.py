"""Exact dense statevector engine: gates, circuits, evolution, sampling.

Bit convention (fixed everywhere): basis-state index bit b_q is the
occupation of qubit q, and qubit 0 is the least significant bit. All
serialized states and bitstrings use this order.

Sampling uses numpy's Philox counter-based generator (Philox4x64-10), so a
fixed seed reproduces shot sequences across platforms.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np
import scipy.linalg

from .pauli import QubitOperator, apply_string, expectation_value, \
    qubit_operator_matrix

EVOLVE_QUBIT_CAP = 14
NORM_TOL = 1e-10

_SQ2 = 1.0 / math.sqrt(2.0)

_H = np.array([[_SQ2, _SQ2], [_SQ2, -_SQ2]], dtype=complex)
_X = np.array([[0, 1], [1, 0]], dtype=complex)
_FSWAP = np.array(
    [[1, 0, 0, 0], [0, 0, 1, 0], [0, 1, 0, 0], [0, 0, 0, -1]], dtype=complex
)
# two-qubit basis order inside a gate: index = 2*b(targets[1]) + b(targets[0])
_CNOT = np.array(
    [[1, 0, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0], [0, 1, 0, 0]], dtype=complex
)
_CZ = np.diag([1, 1, 1, -1]).astype(complex)
_SWAP = np.array(
    [[1, 0, 0, 0], [0, 0, 1, 0], [0, 1, 0, 0], [0, 0, 0, 1]], dtype=complex
)
# butterfly for k = 0; k-dependent gates add a mode phase on targets[1]
_F0 = np.exp(-1j * np.pi / 4) * np.array(
    [[1, 0, 0, 0],
     [0, _SQ2, _SQ2, 0],
     [0, _SQ2, -_SQ2, 0],
     [0, 0, 0, -1]], dtype=complex
)


@dataclass(frozen=True)
class Gate:
    """One gate: kind, target qubits, optional angle, optional dagger flag.

    Kinds: H, X, RZ, PHASEN, CNOT, CZ, SWAP, FSWAP, FSWAP_POW, CPHASE, FK,
    PEXP, GPHASE. PEXP carries ``letters`` (one Pauli letter per target) and
    applies exp(-i * angle * P). PHASEN applies exp(i * angle * n_q). FK
    carries the butterfly twiddle as its angle (2*pi*k/M). GPHASE is the
    circuit-level global phase exp(i * angle), kept so compiled steps can be
    compared against operator exponentials as full matrices.
    """

    kind: str
    targets: tuple
    angle: float = 0.0
    letters: str = ""
    dagger: bool = False

    def __post_init__(self):
        if len(set(self.targets)) != len(self.targets):
            raise ValueError(f"repeated target in {self}")

    def inverse(self) -> "Gate":
        if self.kind in ("H", "X", "CNOT", "CZ", "SWAP", "FSWAP"):
            return self
        if self.kind in ("RZ", "PHASEN", "CPHASE", "FSWAP_POW", "PEXP",
                         "GPHASE"):
            return replace(self, angle=-self.angle)
        return replace(self, dagger=not self.dagger)

    def matrix(self) -> np.ndarray:
        """Dense matrix on the gate's own targets (PEXP excluded)."""
        if self.kind == "H":
            m = _H
        elif self.kind == "X":
            m = _X
        elif self.kind == "RZ":
            m = np.diag([np.exp(-0.5j * self.angle),
                         np.exp(0.5j * self.angle)])
        elif self.kind == "PHASEN":
            m = np.diag([1.0, np.exp(1j * self.angle)])
        elif self.kind == "GPHASE":
            m = np.exp(1j * self.angle) * np.eye(2)
        elif self.kind == "CNOT":
            m = _CNOT
        elif self.kind == "CZ":
            m = _CZ
        elif self.kind == "SWAP":
            m = _SWAP
        elif self.kind == "FSWAP":
            m = _FSWAP
        elif self.kind == "FSWAP_POW":
            # exp(i*theta*fswap); fswap is an involution
            m = math.cos(self.angle) * np.eye(4) \
                + 1j * math.sin(self.angle) * _FSWAP
        elif self.kind == "CPHASE":
            m = np.diag([1, 1, 1, np.exp(1j * self.angle)])
        elif self.kind == "FK":
            phase_q = np.diag([1, 1, np.exp(1j * self.angle),
                               np.exp(1j * self.angle)])
            m = _F0 @ phase_q
        elif self.kind == "PEXP":
            raise ValueError("PEXP has no fixed-size matrix; applied directly")
        else:
            raise ValueError(f"unknown gate kind {self.kind!r}")
        return m.conj().T if self.dagger else m


def fk_gate(k: int, m_modes: int, p: int, q: int) -> Gate:
    """Butterfly gate with twiddle exp(-2*pi*i*k/M) acting on orbitals (p, q)."""
    return Gate("FK", (p, q), angle=2.0 * np.pi * k / m_modes)


@dataclass
class Circuit:
    """Ordered gate list with optional planar-grid connectivity.

    connectivity is None (all-to-all) or ("planar", rows, cols); planar
    qubits are laid out along a boustrophedon path so that chain-adjacent
    qubit labels are always grid-adjacent.
    """

    n_qubits: int
    gates: list = field(default_factory=list)
    connectivity: tuple = None

    def add(self, gate: Gate):
        for t in gate.targets:
            if not 0 <= t < self.n_qubits:
                raise ValueError(f"target {t} outside {self.n_qubits} qubits")
        self.gates.append(gate)

    def extend(self, gates):
        for g in gates:
            self.add(g)

    def inverse(self) -> "Circuit":
        inv = Circuit(self.n_qubits, connectivity=self.connectivity)
        inv.gates = [g.inverse() for g in reversed(self.gates)]
        return inv

    def depth(self) -> int:
        """Greedy layering: gates sharing a qubit may not share a layer."""
        level = [0] * self.n_qubits
        depth = 0
        for g in self.gates:
            layer = 1 + max(level[t] for t in g.targets)
            for t in g.targets:
                level[t] = layer
            depth = max(depth, layer)
        return depth

    def gate_count(self) -> int:
        return len(self.gates)

    # -- planar layout ------------------------------------------------------

    def grid_position(self, qubit: int):
        _, rows, cols = self.connectivity
        r = qubit // cols
        c = qubit % cols
        if r % 2 == 1:
            c = cols - 1 - c
        return r, c

    def check_connectivity(self):
        """Raise if a multi-qubit gate is not lattice-adjacent (planar mode)."""
        if self.connectivity is None:
            return
        for g in self.gates:
            if len(g.targets) < 2:
                continue
            if len(g.targets) > 2:
                raise ValueError(f"planar circuit holds >2-qubit gate {g}")
            (r1, c1), (r2, c2) = map(self.grid_position, g.targets)
            if abs(r1 - r2) + abs(c1 - c2) != 1:
                raise ValueError(
                    f"gate {g} acts on non-adjacent grid sites "
                    f"({r1},{c1})-({r2},{c2})"
                )


@dataclass
class Statevector:
    n_qubits: int
    amplitudes: np.ndarray

    @classmethod
    def zero_state(cls, n_qubits: int) -> "Statevector":
        amps = np.zeros(2 ** n_qubits, dtype=complex)
        amps[0] = 1.0
        return cls(n_qubits, amps)

    @classmethod
    def basis_state(cls, n_qubits: int, bits) -> "Statevector":
        """bits may be an int index or an iterable of per-qubit occupations."""
        if not isinstance(bits, int):
            bits = sum(1 << q for q, b in enumerate(bits) if b)
        amps = np.zeros(2 ** n_qubits, dtype=complex)
        amps[bits] = 1.0
        return cls(n_qubits, amps)

    def copy(self) -> "Statevector":
        return Statevector(self.n_qubits, self.amplitudes.copy())

    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))


def _apply_matrix(amps: np.ndarray, mat: np.ndarray, targets, n: int):
    """Apply a 2^k x 2^k matrix on the given targets; basis order inside the
    gate puts targets[0] on the least significant bit."""
    k = len(targets)
    psi = amps.reshape([2] * n)
    # tensor axis of qubit q is n-1-q; gate index axes ordered MSB first
    axes = [n - 1 - t for t in reversed(targets)]
    psi = np.moveaxis(psi, axes, range(k))
    shape = psi.shape
    psi = psi.reshape(2 ** k, -1)
    psi = mat @ psi
    psi = psi.reshape(shape)
    psi = np.moveaxis(psi, range(k), axes)
    return psi.reshape(-1)


def apply_gate(state: Statevector, gate: Gate) -> Statevector:
    n = state.n_qubits
    for t in gate.targets:
        if not 0 <= t < n:
            raise ValueError(f"target {t} outside {n} qubits")
    if gate.kind == "PEXP":
        key = tuple(sorted(zip(gate.targets, gate.letters)))
        theta = -gate.angle if gate.dagger else gate.angle
        rotated = math.cos(theta) * state.amplitudes \
            - 1j * math.sin(theta) * apply_string(key, state.amplitudes)
        return Statevector(n, rotated)
    new = _apply_matrix(state.amplitudes, gate.matrix(), gate.targets, n)
    return Statevector(n, new)


def apply_circuit(state: Statevector, circuit: Circuit,
                  check_planar: bool = False) -> Statevector:
    if check_planar:
        circuit.check_connectivity()
    out = state
    for g in circuit.gates:
        out = apply_gate(out, g)
    drift = abs(out.norm() - 1.0)
    if drift > NORM_TOL and abs(state.norm() - 1.0) <= NORM_TOL:
        raise RuntimeError(f"norm drift {drift:.3e} after circuit")
    return out


def circuit_matrix(circuit: Circuit) -> np.ndarray:
    """Full unitary of the circuit (small registers only)."""
    n = circuit.n_qubits
    if n > EVOLVE_QUBIT_CAP:
        raise ValueError(f"circuit matrix limited to {EVOLVE_QUBIT_CAP} qubits")
    dim = 2 ** n
    mat = np.eye(dim, dtype=complex)
    for g in circuit.gates:
        if g.kind == "PEXP":
            key = tuple(sorted(zip(g.targets, g.letters)))
            theta = -g.angle if g.dagger else g.angle
            cols = np.empty((dim, dim), dtype=complex)
            for j in range(dim):
                cols[:, j] = apply_string(key, mat[:, j])
            mat = math.cos(theta) * mat - 1j * math.sin(theta) * cols
        else:
            for j in range(dim):
                mat[:, j] = _apply_matrix(mat[:, j], g.matrix(), g.targets, n)
    return mat


# -- evolution and measurement ------------------------------------------------


def exact_evolve(hamiltonian: QubitOperator, t: float,
                 state: Statevector) -> Statevector:
    """Reference exp(-iHt) by dense eigendecomposition."""
    n = state.n_qubits
    if n > EVOLVE_QUBIT_CAP:
        raise ValueError(f"exact evolution limited to {EVOLVE_QUBIT_CAP} qubits")
    mat = qubit_operator_matrix(hamiltonian, n)
    vals, vecs = np.linalg.eigh(mat)
    phases = np.exp(-1j * vals * t)
    amps = vecs @ (phases * (vecs.conj().T @ state.amplitudes))
    return Statevector(n, amps)


def evolution_matrix(hamiltonian: QubitOperator, t: float,
                     n_qubits: int) -> np.ndarray:
    mat = qubit_operator_matrix(hamiltonian, n_qubits)
    return scipy.linalg.expm(-1j * t * mat)


def expectation(state: Statevector, op: QubitOperator) -> float:
    if not op.is_hermitian():
        raise ValueError("expectation needs a Hermitian operator")
    val = expectation_value(op, state.amplitudes)
    if abs(val.imag) > NORM_TOL:
        raise RuntimeError(f"imaginary expectation {val.imag:.3e}")
    return float(val.real)


def make_rng(seed: int) -> np.random.Generator:
    """Counter-based Philox4x64-10 generator; fixed seed, fixed stream."""
    return np.random.Generator(np.random.Philox(seed))


def sample_bitstrings(state: Statevector, basis_rotation: Circuit = None,
                      shots: int = 1, seed: int = 0) -> np.ndarray:
    """Draw basis-state indices from |<x|R|psi>|^2; deterministic per seed."""
    if shots < 1:
        raise ValueError("shots must be >= 1")
    psi = state if basis_rotation is None else apply_circuit(state, basis_rotation)
    probs = np.abs(psi.amplitudes) ** 2
    probs = probs / probs.sum()
    rng = make_rng(seed)
    return rng.choice(len(probs), size=shots, p=probs)


def format_bitstring(index: int, n_qubits: int) -> str:
    """Qubit 0 first (leftmost character)."""
    return "".join("1" if (index >> q) & 1 else "0" for q in range(n_qubits))


# -- text formats --------------------------------------------------------------


def dumps_circuit(circuit: Circuit) -> str:
    from .serialize import fmt
    lines = []
    for g in circuit.gates:
        name = g.kind + (":" + g.letters if g.letters else "")
        if g.dagger:
            name += "'"
        qubits = ",".join(str(t) for t in g.targets)
        if g.kind in ("H", "X", "CNOT", "CZ", "SWAP", "FSWAP"):
            lines.append(f"{name} {qubits}")
        else:
            lines.append(f"{name} {qubits} {fmt(g.angle)}")
    return "\n".join(lines) + ("\n" if lines else "")


def loads_circuit(text: str, n_qubits: int) -> Circuit:
    circ = Circuit(n_qubits)
    for line in text.splitlines():
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split()
        name = parts[0]
        dagger = name.endswith("'")
        if dagger:
            name = name[:-1]
        kind, _, letters = name.partition(":")
        targets = tuple(int(x) for x in parts[1].split(","))
        angle = float(parts[2]) if len(parts) > 2 else 0.0
        circ.add(Gate(kind, targets, angle=angle, letters=letters,
                      dagger=dagger))
    return circ


def dumps_state(state: Statevector) -> str:
    from .serialize import fmt
    lines = ["index,re,im"]
    for i, a in enumerate(state.amplitudes):
        lines.append(f"{i},{fmt(a.real)},{fmt(a.imag)}")
    return "\n".join(lines) + "\n"


def loads_state(text: str) -> Statevector:
    rows = [line for line in text.splitlines() if line and not
            line.startswith("index")]
    amps = np.zeros(len(rows), dtype=complex)
    for row in rows:
        idx, re, im = row.split(",")
        amps[int(idx)] = complex(float(re), float(im))
    n = int(round(math.log2(len(amps))))
    return Statevector(n, amps)
