"""Kinetic, external-potential, and interaction operators in the plane-wave,
dual, and finite-difference representations, plus analytic norm bounds.

All builders are pure functions of (grid, nuclei, options) and return a
HamiltonianSet whose components are FermionOperators over qubit-indexed
orbitals (see geometry for the index conventions).
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np

from .fermion import FermionOperator, RAISE, LOWER, fermion_matrix, \
    jordan_wigner
from .geometry import ModeGrid, UP, DOWN
from .pauli import QubitOperator, PRUNE_TOL

PLANE_WAVE = "plane_wave"
DUAL = "dual"
FINITE_DIFFERENCE = "finite_difference"

# mean inverse separation of two uniform unit-cube charge clouds, halved
ONSITE_REPULSION_CONSTANT = (
    (1 + math.sqrt(2) - 2 * math.sqrt(3)) / 5
    - math.pi / 3
    + math.log((1 + math.sqrt(2)) * (2 + math.sqrt(3)))
)


@dataclass(frozen=True)
class NucleiSpec:
    """Point charges: tuple of (position vector, positive charge)."""

    entries: tuple = ()

    @classmethod
    def build(cls, entries) -> "NucleiSpec":
        norm = []
        for pos, charge in entries or ():
            if charge <= 0:
                raise ValueError(f"nuclear charge must be positive, got {charge}")
            norm.append((tuple(float(x) for x in pos), float(charge)))
        return cls(tuple(norm))

    def total_charge(self) -> float:
        return sum(z for _, z in self.entries)

    def validate_inside(self, grid: ModeGrid):
        L = grid.cell.length
        for pos, _ in self.entries:
            if len(pos) != grid.dimension:
                raise ValueError("nucleus position has wrong dimension")
            if any(not (0.0 <= x <= L) for x in pos):
                raise ValueError(f"nucleus at {pos} outside cell of edge {L}")


@dataclass
class HamiltonianSet:
    """T, U, V components, the user-supplied zero-mode constant, and tags."""

    kinetic: FermionOperator
    external: FermionOperator
    interaction: FermionOperator
    constant: float
    representation: str
    grid: ModeGrid
    n_qubits: int
    nuclei: NucleiSpec = field(default_factory=NucleiSpec)
    truncation: float = None

    def total(self) -> FermionOperator:
        return self.kinetic + self.external + self.interaction

    def matrix(self) -> np.ndarray:
        """Dense occupation-basis matrix (built without the Pauli path)."""
        mat = fermion_matrix(self.total(), self.n_qubits)
        return mat + self.constant * np.eye(mat.shape[0])

    def spectrum(self) -> np.ndarray:
        return np.linalg.eigvalsh(self.matrix())


def _spins(grid: ModeGrid):
    return (UP, DOWN) if grid.cell.spinful else (None,)


def _spin_orbitals(grid: ModeGrid):
    """(qubit, spatial vector) pairs in qubit order; the vector is a site for
    the dual representation and a mode slot for the plane-wave one."""
    return [(q, grid.index_site(grid.qubit_site_index(q)))
            for q in range(grid.n_qubits)]


def _number_key(q: int):
    return ((q, RAISE), (q, LOWER))


def _pair_key(q1: int, q2: int):
    a, b = sorted((q1, q2))
    return ((a, RAISE), (a, LOWER), (b, RAISE), (b, LOWER))


# -- plane-wave representation ----------------------------------------------


def build_plane_wave(grid: ModeGrid, nuclei=None,
                     truncated_D: float = None,
                     constant: float = 0.0) -> HamiltonianSet:
    """Hamiltonian with momentum-indexed orbitals.

    Orbital q carries the mode at slot ``grid.qubit_site_index(q)``. The
    zero mode is excluded from both potentials; with a truncation distance D
    every 1/k^2 kernel picks up a (1 - cos|k|D) factor.
    """
    nuclei = nuclei if isinstance(nuclei, NucleiSpec) else NucleiSpec.build(nuclei)
    nuclei.validate_inside(grid)
    if truncated_D is not None and truncated_D <= 0:
        raise ValueError("truncation distance must be positive")
    omega = grid.cell.volume
    n_spatial = grid.n_spatial

    def kernel(nu) -> float:
        k2 = grid.k_squared(nu)
        if truncated_D is None:
            return 1.0 / k2
        return (1.0 - math.cos(math.sqrt(k2) * truncated_D)) / k2

    kinetic = FermionOperator()
    for q in range(grid.n_qubits):
        nu = grid.slot_mode(grid.qubit_site_index(q))
        k2 = grid.k_squared(nu)
        if k2:
            kinetic.terms[_number_key(q)] = 0.5 * k2

    external = FermionOperator()
    if nuclei.entries:
        # Exact unitary image of the diagonal dual potential. Away from the
        # self-paired mode -M/2 the two pieces coincide and this reduces to
        # the single -(4 pi / Omega) e^{i k_{q-p} . R} / k^2 amplitude; on
        # that mode they symmetrize to a cosine, keeping U Hermitian.
        for sigma in _spins(grid):
            for slot_p in range(n_spatial):
                for slot_q in range(n_spatial):
                    if slot_p == slot_q:
                        continue
                    nu_p = grid.slot_mode(slot_p)
                    nu_q = grid.slot_mode(slot_q)
                    fwd = grid.wrap_mode(np.subtract(nu_q, nu_p))
                    rev = grid.wrap_mode(np.subtract(nu_p, nu_q))
                    coeff = 0.0j
                    for diff, sign in ((fwd, 1.0), (rev, -1.0)):
                        k_diff = grid.k_vector(diff)
                        for pos, charge in nuclei.entries:
                            coeff += charge * kernel(diff) * np.exp(
                                sign * 1j * float(k_diff @ np.asarray(pos)))
                    coeff *= -(2.0 * math.pi / omega)
                    qp = grid.qubit_index(grid.index_site(slot_p), sigma)
                    qq = grid.qubit_index(grid.index_site(slot_q), sigma)
                    external.terms[((qp, RAISE), (qq, LOWER))] = coeff

    interaction = FermionOperator()
    for qp in range(grid.n_qubits):
        for qq in range(grid.n_qubits):
            if qp == qq:
                continue
            nu_p = grid.slot_mode(grid.qubit_site_index(qp))
            nu_q = grid.slot_mode(grid.qubit_site_index(qq))
            for nu in grid.nu_list:
                if not any(nu):
                    continue
                coeff = (2.0 * math.pi / omega) * kernel(nu)
                slot_r = grid.mode_slot(np.add(nu_q, nu))
                slot_s = grid.mode_slot(np.subtract(nu_p, nu))
                if grid.cell.spinful:
                    qr = 2 * slot_r + (qq % 2)
                    qs = 2 * slot_s + (qp % 2)
                else:
                    qr, qs = slot_r, slot_s
                key = ((qp, RAISE), (qq, RAISE), (qr, LOWER), (qs, LOWER))
                interaction.terms[key] = interaction.terms.get(key, 0.0) + coeff
    return HamiltonianSet(kinetic.simplify(), external.simplify(),
                          interaction.simplify(), constant, PLANE_WAVE, grid,
                          grid.n_qubits, nuclei, truncated_D)


# -- dual representation ------------------------------------------------------


def dual_kinetic_coefficient(grid: ModeGrid, delta_site) -> float:
    """(1/2N) sum_nu k^2 cos(k . r_delta) by explicit mode summation."""
    r = grid.r_vector(delta_site)
    acc = 0.0
    for nu in grid.nu_list:
        k = grid.k_vector(nu)
        acc += float(k @ k) * math.cos(float(k @ r))
    return acc / (2.0 * grid.n_spatial)


def dual_pair_coefficient(grid: ModeGrid, delta_site) -> float:
    """(4 pi / Omega) sum_{nu != 0} cos(k . r_delta) / k^2: the coefficient
    of one unordered density-density pair."""
    r = grid.r_vector(delta_site)
    acc = 0.0
    for nu in grid.nu_list:
        if not any(nu):
            continue
        k = grid.k_vector(nu)
        acc += math.cos(float(k @ r)) / float(k @ k)
    return 4.0 * math.pi / grid.cell.volume * acc


def dual_site_potential(grid: ModeGrid, nuclei: NucleiSpec, site) -> float:
    """-(4 pi / Omega) sum_{nu != 0, j} zeta_j cos(k . (R_j - r_site)) / k^2."""
    r = grid.r_vector(site)
    acc = 0.0
    for nu in grid.nu_list:
        if not any(nu):
            continue
        k = grid.k_vector(nu)
        k2 = float(k @ k)
        for pos, charge in nuclei.entries:
            acc += charge * math.cos(float(k @ (np.asarray(pos) - r))) / k2
    return -4.0 * math.pi / grid.cell.volume * acc


def build_dual(grid: ModeGrid, nuclei=None, truncated_D: float = None,
               constant: float = 0.0) -> HamiltonianSet:
    """Hamiltonian with lattice-site orbitals: hopping kinetic term, diagonal
    potentials. With a truncation distance D, density pairs farther apart
    than D (minimum image) are dropped."""
    nuclei = nuclei if isinstance(nuclei, NucleiSpec) else NucleiSpec.build(nuclei)
    nuclei.validate_inside(grid)
    if truncated_D is not None and truncated_D <= 0:
        raise ValueError("truncation distance must be positive")
    sites = grid.site_vectors()

    kinetic = FermionOperator()
    for sigma in _spins(grid):
        for p in sites:
            for q in sites:
                t = dual_kinetic_coefficient(grid, tuple(np.subtract(q, p)))
                if abs(t) <= PRUNE_TOL:
                    continue
                qp = grid.qubit_index(p, sigma)
                qq = grid.qubit_index(q, sigma)
                kinetic.terms[((qp, RAISE), (qq, LOWER))] = t

    external = FermionOperator()
    if nuclei.entries:
        for sigma in _spins(grid):
            for p in sites:
                u = dual_site_potential(grid, nuclei, p)
                if abs(u) > PRUNE_TOL:
                    external.terms[_number_key(grid.qubit_index(p, sigma))] = u

    interaction = FermionOperator()
    orbs = _spin_orbitals(grid)
    for i, (q1, site1) in enumerate(orbs):
        for q2, site2 in orbs[i + 1:]:
            if truncated_D is not None and \
                    grid.min_image_distance(site1, site2) > truncated_D:
                continue
            v = dual_pair_coefficient(grid, tuple(np.subtract(site1, site2)))
            if abs(v) > PRUNE_TOL:
                interaction.terms[_pair_key(q1, q2)] = v
    return HamiltonianSet(kinetic, external, interaction, constant, DUAL,
                          grid, grid.n_qubits, nuclei, truncated_D)


# -- qubit form ----------------------------------------------------------------


def build_qubit(hs: HamiltonianSet) -> QubitOperator:
    """Jordan-Wigner image of a dual-representation Hamiltonian plus its
    constant; contains only I, Z, ZZ, and X/Y parity-string terms."""
    if hs.representation != DUAL:
        raise ValueError("qubit compilation is defined for the dual "
                         "representation")
    op = jordan_wigner(hs.total(), hs.n_qubits)
    if hs.constant:
        op += QubitOperator.identity(hs.constant)
    return op.simplify()


# -- finite difference --------------------------------------------------------


def onsite_repulsion(h: float) -> float:
    """Same-cell opposite-spin repulsion scale of the grid discretization."""
    return ONSITE_REPULSION_CONSTANT / h


@dataclass
class FiniteDifferenceInfo:
    """Term-count bookkeeping for the grid-discretized two-body operator."""

    n_spin_orbitals: int
    n_onsite: int
    n_pair_terms: int

    @property
    def tally(self) -> int:
        """On-site entries counted once more as their own family, matching
        the N/2 + N(N-1)/2 = N^2/2 bookkeeping of the discretization."""
        return self.n_onsite + self.n_pair_terms


def build_finite_difference(shape, h: float, nuclei=None, spinful=True,
                            lam: float = None):
    """Second-quantized Hamiltonian on a real-space grid with open
    boundaries.

    Kinetic term: central-difference stencil, (h/2)(2d n_p - axis-neighbor
    hops). Two-body term: one entry per unordered spin-orbital pair,
    h^3/|p - q| between distinct sites and the on-site constant between
    opposite spins at the same site. ``lam`` overrides the analytic on-site
    value. Returns (HamiltonianSet, FiniteDifferenceInfo).
    """
    if h <= 0:
        raise ValueError("grid spacing must be positive")
    shape = tuple(int(s) for s in shape)
    if not shape or any(s < 1 for s in shape):
        raise ValueError(f"bad grid shape {shape}")
    d = len(shape)
    nuclei = nuclei if isinstance(nuclei, NucleiSpec) else NucleiSpec.build(nuclei)
    lam_value = onsite_repulsion(h) if lam is None else float(lam)

    sites = list(itertools.product(*(range(s) for s in shape)))
    site_index = {p: i for i, p in enumerate(sites)}
    spins = (UP, DOWN) if spinful else (None,)

    def qubit(p, sigma):
        s = site_index[p]
        if not spinful:
            return s
        return 2 * s + (0 if sigma == UP else 1)

    kinetic = FermionOperator()
    for sigma in spins:
        for p in sites:
            qp = qubit(p, sigma)
            kinetic.terms[_number_key(qp)] = \
                kinetic.terms.get(_number_key(qp), 0.0) + h * d
            for axis in range(d):
                for step in (-1, 1):
                    neigh = list(p)
                    neigh[axis] += step
                    if not 0 <= neigh[axis] < shape[axis]:
                        continue
                    qn = qubit(tuple(neigh), sigma)
                    key = ((qn, RAISE), (qp, LOWER))
                    kinetic.terms[key] = kinetic.terms.get(key, 0.0) - h / 2.0

    external = FermionOperator()
    if nuclei.entries:
        for sigma in spins:
            for p in sites:
                r = np.asarray(p, dtype=float) * h
                u = 0.0
                for pos, charge in nuclei.entries:
                    dist = float(np.linalg.norm(r - np.asarray(pos)))
                    if dist == 0.0:
                        raise ValueError("nucleus placed exactly on a grid point")
                    u -= charge / dist
                external.terms[_number_key(qubit(p, sigma))] = (h ** 3) * u

    interaction = FermionOperator()
    n_onsite = 0
    spin_orbitals = sorted((qubit(p, sigma), p) for p in sites for sigma in spins)
    for i, (q1, p1) in enumerate(spin_orbitals):
        for q2, p2 in spin_orbitals[i + 1:]:
            if p1 == p2:
                interaction.terms[_pair_key(q1, q2)] = lam_value
                n_onsite += 1
            else:
                dist = math.sqrt(sum((a - b) ** 2 for a, b in zip(p1, p2)))
                interaction.terms[_pair_key(q1, q2)] = (h ** 3) / dist

    n_so = len(spin_orbitals)
    info = FiniteDifferenceInfo(n_so, n_onsite, len(interaction.terms))
    hs = HamiltonianSet(kinetic.simplify(), external.simplify(),
                        interaction.simplify(), 0.0, FINITE_DIFFERENCE,
                        None, n_so, nuclei, None)
    return hs, info


def mode_energies(hs: HamiltonianSet):
    """Per-mode one-body energies of a translation-invariant kinetic term.

    Inverts t(delta) -> eps_nu by mode summation and verifies the hopping
    row is reproduced; raises if the kinetic term is not diagonalized by
    the mode rotation. For the standard dual kinetic term this returns
    k^2/2 per mode (keyed by slot).
    """
    grid = hs.grid
    t_row = {}
    for key, coeff in hs.kinetic.items():
        (qa, _), (qb, _) = key
        if qa == 0:
            t_row[grid.qubit_site_index(qb)] = coeff.real
    eps = {}
    for slot in range(grid.n_spatial):
        nu = grid.slot_mode(slot)
        k = grid.k_vector(nu)
        acc = 0.0
        for site, t in t_row.items():
            r = grid.r_vector(grid.index_site(site))
            acc += t * math.cos(float(k @ r))
        eps[slot] = acc
    n_spatial = grid.n_spatial
    for site, t in t_row.items():
        r = grid.r_vector(grid.index_site(site))
        rebuilt = sum(
            eps[slot] * math.cos(float(grid.k_vector(grid.slot_mode(slot)) @ r))
            for slot in range(n_spatial)
        ) / n_spatial
        if abs(rebuilt - t) > 1e-9:
            raise ValueError("kinetic term is not translation invariant; "
                             "mode-basis diagonalization does not apply")
    return eps


# -- norm bounds ---------------------------------------------------------------


def norm_bounds(hs: HamiltonianSet, eta: int) -> dict:
    """Finite-grid bound values for eta-electron expectations and
    triangle-inequality coefficient sums.

    max_* bound |<psi|O|psi>| over eta-electron states; triangle_* are
    coefficient 1-norms; lam is the coefficient 1-norm of the compiled qubit
    operator (identity included).
    """
    if hs.representation != DUAL:
        raise ValueError("norm bounds are defined on the dual representation")
    if eta < 1:
        raise ValueError("eta must be >= 1")
    grid = hs.grid
    omega = grid.cell.volume
    sum_inv_k2 = sum(
        1.0 / grid.k_squared(nu) for nu in grid.nu_list if any(nu)
    )
    max_v = (2.0 * math.pi * eta ** 2 / omega) * sum_inv_k2
    max_u = (4.0 * math.pi * eta / omega) * hs.nuclei.total_charge() \
        * sum_inv_k2
    max_t = eta * grid.max_k_squared() / 2.0

    triangle_t = 0.0
    for p in grid.site_vectors():
        r = grid.r_vector(p)
        acc = 0.0
        for nu in grid.nu_list:
            k = grid.k_vector(nu)
            acc += float(k @ k) * math.cos(float(k @ r))
        triangle_t += abs(acc)
    triangle_t *= grid.n_spin / 2.0

    triangle_u = sum(abs(c) for c in hs.external.terms.values())
    triangle_v = sum(abs(c) for c in hs.interaction.terms.values())
    lam = build_qubit(hs).coefficient_norm(include_identity=True)
    return {
        "max_v": max_v,
        "max_u": max_u,
        "max_t": max_t,
        "max_h": max_t + max_u + max_v,
        "triangle_t": triangle_t,
        "triangle_h": triangle_t + triangle_u + triangle_v,
        "lam": lam,
    }
