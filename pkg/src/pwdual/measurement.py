"""Energy estimators by operator averaging, their shot budgets, and
empirical variance checks.

Three sampling strategies:

* ``per_term``: every Pauli term is measured in its own eigenbasis.
* ``diagonal_groups``: the diagonal potentials are read off computational
  basis samples in one group; the kinetic term is read off samples taken
  after the mode rotation, where it is diagonal too.
* ``diagonal_uv_only``: potentials as one diagonal group, kinetic term
  per-term, for hardware that wants to skip the coherent mode rotation.

Group estimators evaluate the full diagonal polynomial on each sampled
bitstring rather than per-term Bernoulli trials. Batch seeds derive from
the master seed by fixed offsets (seed * 2^16 + counter), so runs are
reproducible and groups are independent.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .fermion import jordan_wigner
from .ffft import build_ffft_nd
from .hamiltonian import HamiltonianSet, DUAL, build_qubit, mode_energies, \
    norm_bounds
from .statevector import Statevector, Circuit, Gate, apply_circuit, \
    sample_bitstrings

PER_TERM = "per_term"
DIAGONAL_GROUPS = "diagonal_groups"
DIAGONAL_UV_ONLY = "diagonal_uv_only"
PHASE_ESTIMATION = "phase_estimation"

STRATEGIES = (PER_TERM, DIAGONAL_GROUPS, DIAGONAL_UV_ONLY)


@dataclass(frozen=True)
class MeasurementPlan:
    strategy: str = DIAGONAL_GROUPS
    shots: int = 1000
    seed: int = 0

    def __post_init__(self):
        if self.strategy not in STRATEGIES:
            raise ValueError(f"unknown strategy {self.strategy!r}")
        if self.shots < 2:
            raise ValueError("need at least 2 shots for a variance estimate")


def _batch_seed(master: int, counter: int) -> int:
    return master * (1 << 16) + counter


def diagonal_potential_values(hs: HamiltonianSet, samples: np.ndarray):
    """Classical diagonal energy of U + V on each sampled bitstring."""
    values = np.zeros(len(samples), dtype=float)
    for key, coeff in hs.external.items():
        q = key[0][0]
        values += coeff.real * ((samples >> q) & 1)
    for key, coeff in hs.interaction.items():
        q1, q2 = key[0][0], key[2][0]
        values += coeff.real * ((samples >> q1) & 1) * ((samples >> q2) & 1)
    return values


def kinetic_mode_values(hs: HamiltonianSet, samples: np.ndarray):
    """Mode-basis kinetic energy of each bitstring sampled after rotation."""
    grid = hs.grid
    eps = mode_energies(hs)
    values = np.zeros(len(samples), dtype=float)
    for q in range(hs.n_qubits):
        e = eps[grid.qubit_site_index(q)]
        if e:
            values += e * ((samples >> q) & 1)
    return values


def _pauli_basis_rotation(key, n_qubits: int) -> Circuit:
    """Rotation R with R P R^dag diagonal: H for X, exp(-i pi/4 X) for Y."""
    circ = Circuit(n_qubits)
    for q, letter in key:
        if letter == "X":
            circ.add(Gate("H", (q,)))
        elif letter == "Y":
            circ.add(Gate("PEXP", (q,), angle=math.pi / 4, letters="X"))
    return circ


def _pauli_term_values(key, samples: np.ndarray):
    values = np.ones(len(samples), dtype=float)
    for q, _ in key:
        values *= 1.0 - 2.0 * ((samples >> q) & 1)
    return values


def _per_term_samples(state, op, shots, seed):
    """(coefficient, per-shot eigenvalues) for each non-identity term."""
    out = []
    for counter, (key, coeff) in enumerate(op.items()):
        if key == ():
            continue
        rot = _pauli_basis_rotation(key, state.n_qubits)
        samples = sample_bitstrings(state, basis_rotation=rot, shots=shots,
                                    seed=_batch_seed(seed, counter))
        out.append((coeff.real, _pauli_term_values(key, samples)))
    return out


def _group_samples(state, hs, plan):
    """Per-shot values of each sampled group plus the exact offset."""
    groups = []
    offset = hs.constant
    if plan.strategy in (DIAGONAL_GROUPS, DIAGONAL_UV_ONLY):
        uv = sample_bitstrings(state, shots=plan.shots,
                               seed=_batch_seed(plan.seed, 0))
        groups.append(diagonal_potential_values(hs, uv))
    if plan.strategy == DIAGONAL_GROUPS:
        rotation = build_ffft_nd(hs.grid)
        rotated = apply_circuit(state, rotation)
        t_samples = sample_bitstrings(rotated, shots=plan.shots,
                                      seed=_batch_seed(plan.seed, 1))
        groups.append(kinetic_mode_values(hs, t_samples))
    elif plan.strategy == DIAGONAL_UV_ONLY:
        kin = jordan_wigner(hs.kinetic, hs.n_qubits)
        offset += kin.constant().real
        for coeff, values in _per_term_samples(state, kin, plan.shots,
                                               plan.seed + 1):
            groups.append(coeff * values)
    elif plan.strategy == PER_TERM:
        op = build_qubit(hs)
        offset += op.constant().real - hs.constant  # constant already counted
        for coeff, values in _per_term_samples(state, op, plan.shots,
                                               plan.seed):
            groups.append(coeff * values)
    return groups, offset


def estimate_energy(state: Statevector, hs: HamiltonianSet,
                    plan: MeasurementPlan):
    """Unbiased energy estimate and its standard error.

    Groups are sampled independently; the estimate is the sum of group
    means plus exact constants, the standard error adds group variances.
    """
    if hs.representation != DUAL:
        raise ValueError("estimators are defined on the dual representation")
    groups, offset = _group_samples(state, hs, plan)
    estimate = offset + sum(float(np.mean(g)) for g in groups)
    variance = sum(float(np.var(g, ddof=1)) / len(g) for g in groups)
    return estimate, math.sqrt(variance)


def empirical_variance(state: Statevector, hs: HamiltonianSet,
                       strategy: str, shots: int, seed: int) -> float:
    """Sample variance of the single-shot estimator (summed over groups)."""
    plan = MeasurementPlan(strategy, shots, seed)
    groups, _ = _group_samples(state, hs, plan)
    total = np.zeros(shots, dtype=float)
    for g in groups:
        total += g
    return float(np.var(total, ddof=1))


def empirical_shot_requirement(state: Statevector, hs: HamiltonianSet,
                               strategy: str, target_stderr: float,
                               seed: int, start: int = 16,
                               cap: int = 1 << 22) -> int:
    """Smallest power-of-two shot count whose measured standard error meets
    the target; geometric search from ``start``."""
    shots = start
    while shots <= cap:
        _, stderr = estimate_energy(state, hs,
                                    MeasurementPlan(strategy, shots, seed))
        if stderr <= target_stderr:
            return shots
        shots *= 2
    raise RuntimeError(f"no shot count up to {cap} met {target_stderr}")


def shot_budget(hs: HamiltonianSet, eta: int, precision: float,
                mode: str = "absolute",
                strategy: str = DIAGONAL_GROUPS) -> float:
    """Analytic repetition bound for the strategy at the given precision.

    ``absolute`` reads ``precision`` as the energy tolerance; ``relative``
    reads it as tolerance per electron (the allowed absolute error grows
    with eta, dividing the budget by eta^2). The phase-estimation-style
    entry scales linearly in 1/precision instead of quadratically.
    """
    if precision <= 0:
        raise ValueError("precision must be positive")
    if mode not in ("absolute", "relative"):
        raise ValueError(f"unknown mode {mode!r}")
    bounds = norm_bounds(hs, eta)
    coeff_sum = build_qubit(hs).coefficient_norm(include_identity=False)
    if strategy == PER_TERM:
        budget = (coeff_sum / precision) ** 2
    elif strategy == DIAGONAL_GROUPS:
        budget = (bounds["max_t"] ** 2
                  + (bounds["max_u"] + bounds["max_v"]) ** 2) / precision ** 2
    elif strategy == DIAGONAL_UV_ONLY:
        budget = (bounds["triangle_t"] ** 2
                  + (bounds["max_u"] + bounds["max_v"]) ** 2) / precision ** 2
    elif strategy == PHASE_ESTIMATION:
        budget = coeff_sum / precision
    else:
        raise ValueError(f"unknown strategy {strategy!r}")
    if mode == "relative":
        budget /= eta ** 2
    return budget


def exact_group_variances(hs: HamiltonianSet, state: Statevector):
    """Matrix-level Var[T] and Var[U+V] on the given state."""
    from .fermion import fermion_matrix
    psi = state.amplitudes
    out = {}
    for name, op in (("t", hs.kinetic),
                     ("uv", hs.external + hs.interaction)):
        mat = fermion_matrix(op, hs.n_qubits)
        mean = float(np.real(psi.conj() @ mat @ psi))
        second = float(np.real(psi.conj() @ (mat @ (mat @ psi))))
        out[name] = second - mean ** 2
    return out
