"""Ladder-operator sums, normal ordering, the Jordan-Wigner encoding, and
an independent occupation-basis matrix builder.

Terms are tuples of (orbital, flag) with flag 1 for raising and 0 for
lowering. Canonical form is normal ordered: all raising factors first,
indices strictly descending inside each block. The empty tuple is the
identity.
"""

from __future__ import annotations

import numpy as np

from .pauli import QubitOperator, PRUNE_TOL, HERMITIAN_TOL

RAISE = 1
LOWER = 0


class FermionOperator:
    """Weighted sum of ladder-operator products, kept in normal order."""

    def __init__(self, terms=None):
        # raw storage; canonical form is produced by normal_order()
        self.terms = {}
        if terms:
            for key, coeff in dict(terms).items():
                key = tuple((int(q), int(f)) for q, f in key)
                self.terms[key] = self.terms.get(key, 0.0) + complex(coeff)

    @classmethod
    def from_term(cls, key, coeff=1.0):
        return cls({tuple(key): coeff})

    @classmethod
    def identity(cls, coeff=1.0):
        return cls({(): coeff})

    @classmethod
    def raising(cls, orbital, coeff=1.0):
        return cls({((orbital, RAISE),): coeff})

    @classmethod
    def lowering(cls, orbital, coeff=1.0):
        return cls({((orbital, LOWER),): coeff})

    @classmethod
    def number(cls, orbital, coeff=1.0):
        return cls({((orbital, RAISE), (orbital, LOWER)): coeff})

    def copy(self):
        out = FermionOperator()
        out.terms = dict(self.terms)
        return out

    def items(self):
        return sorted(self.terms.items())

    def __add__(self, other):
        out = self.copy()
        out += other
        return out

    def __iadd__(self, other):
        for key, coeff in other.terms.items():
            self.terms[key] = self.terms.get(key, 0.0) + coeff
        return self

    def __sub__(self, other):
        return self + (other * -1.0)

    def __mul__(self, other):
        if isinstance(other, FermionOperator):
            out = FermionOperator()
            for ka, ca in self.terms.items():
                for kb, cb in other.terms.items():
                    key = ka + kb
                    out.terms[key] = out.terms.get(key, 0.0) + ca * cb
            return out
        out = self.copy()
        for key in out.terms:
            out.terms[key] *= complex(other)
        return out

    __rmul__ = __mul__

    def simplify(self, tol=PRUNE_TOL):
        self.terms = {k: c for k, c in self.terms.items() if abs(c) > tol}
        return self

    def hermitian_conjugate(self):
        out = FermionOperator()
        for key, coeff in self.terms.items():
            conj_key = tuple((q, 1 - f) for q, f in reversed(key))
            out.terms[conj_key] = out.terms.get(conj_key, 0.0) + coeff.conjugate()
        return out

    def is_hermitian(self, tol=HERMITIAN_TOL) -> bool:
        diff = normal_order(self) - normal_order(self.hermitian_conjugate())
        diff.simplify(tol)
        return not diff.terms

    def n_orbitals(self) -> int:
        orbs = [q for key in self.terms for q, _ in key]
        return max(orbs) + 1 if orbs else 0

    def __repr__(self):
        parts = []
        for key, coeff in self.items():
            label = " ".join(f"{q}^" if f else f"{q}" for q, f in key) or "1"
            parts.append(f"({coeff:.6g}) [{label}]")
        return " + ".join(parts) if parts else "0"


def _normal_order_term(key, coeff, out):
    """Rewrite one product into canonical form, accumulating into ``out``.

    Bubble pass using the anticommutation rules; recursion handles the
    contraction term produced by a_p a+_p swaps.
    """
    key = list(key)
    i = 0
    while i + 1 < len(key):
        (q1, f1), (q2, f2) = key[i], key[i + 1]
        if f1 == LOWER and f2 == RAISE:
            # a_q1 a+_q2 = delta - a+_q2 a_q1
            if q1 == q2:
                _normal_order_term(key[:i] + key[i + 2:], coeff, out)
            key[i], key[i + 1] = key[i + 1], key[i]
            coeff = -coeff
            i = max(i - 1, 0)
        elif f1 == f2:
            if q1 == q2:
                return  # nilpotent
            if q1 < q2:  # descending order within a block
                key[i], key[i + 1] = key[i + 1], key[i]
                coeff = -coeff
                i = max(i - 1, 0)
            else:
                i += 1
        else:
            i += 1
    k = tuple(key)
    out[k] = out.get(k, 0.0) + coeff


def normal_order(op: FermionOperator, tol=PRUNE_TOL) -> FermionOperator:
    """Canonical normal-ordered form with equal action on every Fock state."""
    acc = {}
    for key, coeff in op.terms.items():
        _normal_order_term(key, coeff, acc)
    out = FermionOperator()
    out.terms = acc
    return out.simplify(tol)


# -- Jordan-Wigner ----------------------------------------------------------


def jordan_wigner(op: FermionOperator, n_qubits: int) -> QubitOperator:
    """Encode ladder operators as Pauli strings with Z parity chains.

    a+_p -> (X_p - iY_p)/2 * Z_{p-1} ... Z_0 ; lowering takes the +i sign.
    """
    out = QubitOperator()
    for key, coeff in op.terms.items():
        factor = QubitOperator.identity(coeff)
        for q, flag in key:
            if q >= n_qubits:
                raise ValueError(f"orbital {q} outside register of {n_qubits}")
            sign = -1j if flag == RAISE else 1j
            chain = tuple((j, "Z") for j in range(q))
            half = QubitOperator({chain + ((q, "X"),): 0.5,
                                  chain + ((q, "Y"),): 0.5 * sign})
            factor = factor * half
        out += factor
    return out.simplify()


# -- occupation-basis matrices (independent of the Pauli path) --------------

MATRIX_QUBIT_CAP = 14


def fermion_matrix(op: FermionOperator, n_orbitals: int) -> np.ndarray:
    """Dense matrix in the occupation basis, built directly from ladder
    actions with explicit parity signs.

    Basis index bit q holds the occupation of orbital q (bit 0 least
    significant), identical to the qubit convention, so this matrix can be
    compared against the Jordan-Wigner image built through the Pauli path.
    """
    if n_orbitals > MATRIX_QUBIT_CAP:
        raise ValueError(f"dense matrix limited to {MATRIX_QUBIT_CAP} orbitals")
    if op.n_orbitals() > n_orbitals:
        raise ValueError("operator acts outside the requested register")
    dim = 2 ** n_orbitals
    mat = np.zeros((dim, dim), dtype=complex)
    for key, coeff in op.terms.items():
        for x in range(dim):
            state = x
            amp = coeff
            dead = False
            for q, flag in reversed(key):  # rightmost factor acts first
                bit = (state >> q) & 1
                if flag == RAISE:
                    if bit:
                        dead = True
                        break
                    parity = bin(state & ((1 << q) - 1)).count("1")
                    amp *= -1 if parity % 2 else 1
                    state |= 1 << q
                else:
                    if not bit:
                        dead = True
                        break
                    parity = bin(state & ((1 << q) - 1)).count("1")
                    amp *= -1 if parity % 2 else 1
                    state &= ~(1 << q)
            if not dead:
                mat[state, x] += amp
    return mat


def total_number_operator(n_orbitals: int) -> FermionOperator:
    op = FermionOperator()
    for q in range(n_orbitals):
        op += FermionOperator.number(q)
    return op
