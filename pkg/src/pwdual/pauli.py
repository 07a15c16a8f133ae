"""Sparse Pauli-string sums with exact complex coefficients.

A PauliString is a sorted tuple of (qubit, letter) pairs with letter in
{X, Y, Z}; identity factors are omitted, the empty tuple is the identity.
QubitOperator is a dict from PauliString to complex coefficient with
deterministic iteration order.
"""

from __future__ import annotations

import numpy as np

PRUNE_TOL = 1e-12
HERMITIAN_TOL = 1e-12

_PAULI_MATS = {
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
}

# single-qubit products: (a, b) -> (phase, result letter or None for identity)
_PAULI_PRODUCT = {
    ("X", "X"): (1, None), ("Y", "Y"): (1, None), ("Z", "Z"): (1, None),
    ("X", "Y"): (1j, "Z"), ("Y", "X"): (-1j, "Z"),
    ("Y", "Z"): (1j, "X"), ("Z", "Y"): (-1j, "X"),
    ("Z", "X"): (1j, "Y"), ("X", "Z"): (-1j, "Y"),
}


def pauli_string(pairs) -> tuple:
    """Canonicalize an iterable of (qubit, letter) pairs."""
    d = {}
    for q, letter in pairs:
        if letter not in ("X", "Y", "Z"):
            raise ValueError(f"bad Pauli letter {letter!r}")
        if q in d:
            raise ValueError(f"duplicate qubit {q} in Pauli string")
        d[int(q)] = letter
    return tuple(sorted(d.items()))


def multiply_strings(a: tuple, b: tuple):
    """Product of two Pauli strings: returns (phase, string)."""
    da, db = dict(a), dict(b)
    phase = 1 + 0j
    out = {}
    for q in sorted(set(da) | set(db)):
        la, lb = da.get(q), db.get(q)
        if la is None:
            out[q] = lb
        elif lb is None:
            out[q] = la
        else:
            ph, res = _PAULI_PRODUCT[(la, lb)]
            phase *= ph
            if res is not None:
                out[q] = res
    return phase, tuple(sorted(out.items()))


class QubitOperator:
    """Weighted sum of Pauli strings."""

    def __init__(self, terms=None):
        self.terms = {}
        if terms:
            for key, coeff in dict(terms).items():
                self.terms[pauli_string(key)] = complex(coeff)

    @classmethod
    def from_term(cls, pairs, coeff=1.0):
        op = cls()
        op.terms[pauli_string(pairs)] = complex(coeff)
        return op

    @classmethod
    def identity(cls, coeff=1.0):
        return cls.from_term((), coeff)

    def copy(self):
        op = QubitOperator()
        op.terms = dict(self.terms)
        return op

    def items(self):
        """Deterministic (string, coeff) iteration, sorted by key."""
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
        if isinstance(other, QubitOperator):
            out = QubitOperator()
            for ka, ca in self.terms.items():
                for kb, cb in other.terms.items():
                    phase, key = multiply_strings(ka, kb)
                    out.terms[key] = out.terms.get(key, 0.0) + ca * cb * phase
            return out
        out = self.copy()
        for key in out.terms:
            out.terms[key] *= complex(other)
        return out

    __rmul__ = __mul__

    def simplify(self, tol=PRUNE_TOL):
        """Drop terms with |coefficient| below tol (in place); returns self."""
        self.terms = {k: c for k, c in self.terms.items() if abs(c) > tol}
        return self

    def n_qubits(self) -> int:
        qubits = [q for key in self.terms for q, _ in key]
        return max(qubits) + 1 if qubits else 0

    def is_hermitian(self, tol=HERMITIAN_TOL) -> bool:
        return all(abs(c.imag) <= tol for c in self.terms.values())

    def hermitian_conjugate(self):
        out = QubitOperator()
        out.terms = {k: c.conjugate() for k, c in self.terms.items()}
        return out

    def constant(self) -> complex:
        return self.terms.get((), 0.0)

    def coefficient_norm(self, include_identity=True) -> float:
        """Sum of absolute coefficients."""
        return sum(
            abs(c) for k, c in self.terms.items() if include_identity or k != ()
        )

    def __repr__(self):
        parts = []
        for key, coeff in self.items():
            label = " ".join(f"{letter}{q}" for q, letter in key) or "I"
            parts.append(f"({coeff:.6g}) {label}")
        return " + ".join(parts) if parts else "0"


def string_matrix(key: tuple, n_qubits: int) -> np.ndarray:
    """Dense matrix of a single Pauli string; qubit 0 is the least
    significant bit of the basis index."""
    mat = np.ones((1, 1), dtype=complex)
    letters = dict(key)
    for q in range(n_qubits):
        factor = _PAULI_MATS.get(letters.get(q), np.eye(2, dtype=complex))
        mat = np.kron(factor, mat)
    return mat


MATRIX_QUBIT_CAP = 14


def qubit_operator_matrix(op: QubitOperator, n_qubits: int) -> np.ndarray:
    if n_qubits > MATRIX_QUBIT_CAP:
        raise ValueError(f"dense matrix limited to {MATRIX_QUBIT_CAP} qubits")
    if op.n_qubits() > n_qubits:
        raise ValueError("operator acts outside the requested register")
    dim = 2 ** n_qubits
    mat = np.zeros((dim, dim), dtype=complex)
    for key, coeff in op.items():
        mat += coeff * string_matrix(key, n_qubits)
    return mat


def apply_string(key: tuple, state: np.ndarray) -> np.ndarray:
    """Apply one Pauli string to a dense state without building the matrix."""
    n = int(np.log2(state.size))
    flip = 0
    phase_mask = 0
    y_count = 0
    for q, letter in key:
        if q >= n:
            raise ValueError("string acts outside the register")
        if letter in ("X", "Y"):
            flip |= 1 << q
        if letter in ("Y", "Z"):
            phase_mask |= 1 << q
        if letter == "Y":
            y_count += 1
    idx = np.arange(state.size, dtype=np.int64)
    src = idx ^ flip
    # (-1)^{popcount(src & phase_mask)}
    par = np.zeros(state.size, dtype=np.int64)
    m = phase_mask
    while m:
        b = m & -m
        par ^= (src & b) != 0
        m ^= b
    signs = 1.0 - 2.0 * par
    return (1j ** y_count) * signs * state[src]


def expectation_value(op: QubitOperator, state: np.ndarray) -> complex:
    return sum(
        coeff * np.vdot(state, apply_string(key, state))
        for key, coeff in op.items()
    )


def self_inverse_decompose(op: QubitOperator, tol=HERMITIAN_TOL):
    """Split a Hermitian operator into signed nonnegative weights on
    self-inverse Pauli strings.

    Returns (terms, lam) where terms is a list of (weight, sign, string)
    and lam is the sum of weights.
    """
    if not op.is_hermitian(tol):
        raise ValueError("self-inverse decomposition needs a Hermitian operator")
    terms = []
    lam = 0.0
    for key, coeff in op.items():
        w = abs(coeff.real)
        if w <= tol:
            continue
        sign = 1 if coeff.real > 0 else -1
        terms.append((w, sign, key))
        lam += w
    return terms, lam
