"""Named operators of the quasispin pairing problem.

Covers the pairing Hamiltonian in all three modes, the rational Gaudin
magnets R_j (reduced pairing), the degenerate-case invariants P_j, the
parametrized pair fields J(alpha; lambda) and S(x), the particle-hole
rotation T and the symmetry B = T^dagger S^-(0).
"""

from __future__ import annotations

import cmath
import enum
import functools
from dataclasses import dataclass
from typing import Sequence

import numpy as np
import scipy.sparse as sp

from .hilbert import (
    LevelScheme,
    LinearOperator,
    Mode,
    QuasispinBasis,
    SchemeError,
    build_basis,
    identity,
    ladder,
    pair_number_operator,
    weight_operator,
    zero_operator,
)

# Minimal |denominator| accepted when evaluating a pair field.
POLE_TOL = 1e-12


def _raise_lower(basis: QuasispinBasis, j: int, k: int) -> LinearOperator:
    """S_j^+ S_k^- as a number-conserving operator on ``basis``."""
    return ladder(basis.shifted(-1), j, +1) @ ladder(basis, k, -1)


def _lower_raise(basis: QuasispinBasis, j: int, k: int) -> LinearOperator:
    """S_j^- S_k^+ on ``basis``."""
    return ladder(basis.shifted(+1), j, -1) @ ladder(basis, k, +1)


def spin_dot(basis: QuasispinBasis, j: int, k: int) -> LinearOperator:
    """S_j . S_k = S_j^0 S_k^0 + (S_j^+ S_k^- + S_j^- S_k^+) / 2."""
    return (
        weight_operator(basis, j) @ weight_operator(basis, k)
        + 0.5 * (_raise_lower(basis, j, k) + _lower_raise(basis, j, k))
    )


def _collective_pair(basis: QuasispinBasis, coeffs: Sequence[complex], sign: int) -> LinearOperator:
    """sum_j coeffs[j] S_j^(sign) out of ``basis``."""
    ops = [ladder(basis, j, sign) for j in range(basis.scheme.n)]
    out = coeffs[0] * ops[0]
    for cj, op in zip(coeffs[1:], ops[1:]):
        out = out + cj * op
    return out


def _pairing_term(scheme: LevelScheme, basis: QuasispinBasis) -> LinearOperator:
    """(sum_j c_j S_j^+)(sum_k c_k S_k^-) on ``basis``."""
    c = scheme.cs
    down = _collective_pair(basis, c, -1)
    up = _collective_pair(basis.shifted(-1), c, +1)
    return up @ down


def build_hamiltonian(scheme: LevelScheme, basis: QuasispinBasis) -> LinearOperator:
    """Pairing Hamiltonian in quasispin form.

    general:    sum_j eps_j (2 S_j^0 + Omega_j) - |G| (sum c_j S_j^+)(sum c_k S_k^-)
    reduced:    same with c_j c_k = d = 1/n
    degenerate: the constant kinetic term is dropped, H_D = -|G| S^+(0) S^-(0)
    """
    pairing = _pairing_term(scheme, basis)
    if scheme.mode is Mode.REDUCED:
        c = np.full(scheme.n, np.sqrt(scheme.d))
        pairing = _collective_pair(basis.shifted(-1), c, +1) @ _collective_pair(basis, c, -1)
    h = -scheme.g * pairing
    if scheme.mode is Mode.DEGENERATE:
        return h
    occ = basis.occupations
    # eps_j (2 S_j^0 + Omega_j) = 2 eps_j N_j
    kinetic = 2.0 * occ @ scheme.epsilons
    return h + LinearOperator(sp.diags(kinetic.astype(complex), format="csr"), basis, basis)


def build_gaudin_magnets(scheme: LevelScheme, basis: QuasispinBasis) -> list[LinearOperator]:
    """R_j = S_j^0 - |G| d sum_{k != j} S_j.S_k / (eps_j - eps_k)."""
    eps = scheme.epsilons
    n = scheme.n
    for j in range(n):
        for k in range(j + 1, n):
            if abs(eps[j] - eps[k]) <= 1e-9:
                raise SchemeError(
                    f"Gaudin magnets need distinct energies; levels {j + 1} and {k + 1} coincide",
                    "reduced: distinct epsilon_j",
                    k,
                )
    gd = scheme.g * scheme.d
    dots = {(j, k): spin_dot(basis, j, k) for j in range(n) for k in range(j + 1, n)}
    magnets = []
    for j in range(n):
        r = weight_operator(basis, j)
        for k in range(n):
            if k != j:
                r = r - gd / (eps[j] - eps[k]) * dots[min(j, k), max(j, k)]
        magnets.append(r)
    return magnets


def build_degenerate_invariants(scheme: LevelScheme, basis: QuasispinBasis) -> list[LinearOperator]:
    """Conserved charges P_j of the degenerate pairing Hamiltonian.

    P_j = -S_j^+ S_j^-
          + 2 sum_{k != j} c_k^2 / (c_k^2 - c_j^2) S_j^0 S_k^0
          + sum_{k != j} c_j c_k / (c_k^2 - c_j^2) (S_j^+ S_k^- + S_k^+ S_j^-)
    """
    c = scheme.cs
    c2 = c**2
    n = scheme.n
    for j in range(n):
        for k in range(j + 1, n):
            if abs(c2[j] - c2[k]) <= 1e-9:
                raise SchemeError(
                    f"degenerate invariants need distinct c_j^2; levels {j + 1} and {k + 1} coincide",
                    "degenerate: distinct c_j^2",
                    k,
                )
    s0 = [weight_operator(basis, j) for j in range(n)]
    invariants = []
    for j in range(n):
        p = -_raise_lower(basis, j, j)
        for k in range(n):
            if k == j:
                continue
            denom = c2[k] - c2[j]
            p = p + (2.0 * c2[k] / denom) * (s0[j] @ s0[k])
            p = p + (c[j] * c[k] / denom) * (_raise_lower(basis, j, k) + _raise_lower(basis, k, j))
        invariants.append(p)
    return invariants


class FieldKind(str, enum.Enum):
    RICHARDSON_J = "richardson_J"
    DEGENERATE_S = "degenerate_S"
    GAUDIN_GENERAL = "gaudin_general"


@dataclass(frozen=True)
class PairFieldParams:
    """Parameters of a parametrized pair field.

    richardson_J:   J(xi)      = sum_j S_j / (2 eps_j - xi)
    degenerate_S:   S(x)       = sum_j c_j / (1 - c_j^2 x) S_j
    gaudin_general: J(a; lam)  = sum_j S_j / (a_j - lam)
    """

    kind: FieldKind
    value: complex
    alphas: tuple[float, ...] | None = None

    @classmethod
    def richardson(cls, xi: complex) -> "PairFieldParams":
        return cls(FieldKind.RICHARDSON_J, complex(xi))

    @classmethod
    def degenerate(cls, x: complex) -> "PairFieldParams":
        return cls(FieldKind.DEGENERATE_S, complex(x))

    @classmethod
    def gaudin(cls, alphas: Sequence[float], lam: complex) -> "PairFieldParams":
        return cls(FieldKind.GAUDIN_GENERAL, complex(lam), tuple(float(a) for a in alphas))

    def coefficients(self, scheme: LevelScheme) -> np.ndarray:
        v = self.value
        if self.kind is FieldKind.RICHARDSON_J:
            denom = 2.0 * scheme.epsilons - v
            num = np.ones(scheme.n)
        elif self.kind is FieldKind.DEGENERATE_S:
            c = scheme.cs
            denom = 1.0 - c**2 * v
            num = c
        else:
            if self.alphas is None or len(self.alphas) != scheme.n:
                raise ValueError("gaudin_general needs one alpha per level")
            denom = np.asarray(self.alphas) - v
            num = np.ones(scheme.n)
        if np.min(np.abs(denom)) < POLE_TOL:
            j = int(np.argmin(np.abs(denom)))
            raise SchemeError(
                f"pair field parameter {v} sits on the pole of level {j + 1}", "parameter off poles", j
            )
        return num / denom


def build_pair_field(
    scheme: LevelScheme, basis: QuasispinBasis, params: PairFieldParams, sign: str
) -> LinearOperator:
    """Parametrized generator with component ``sign`` in {'+', '-', '0'}.

    '+' and '-' map out of ``basis`` into the N+1 / N-1 neighbour; '0' is
    diagonal and only defined for the J-type fields.
    """
    coeffs = params.coefficients(scheme)
    if sign == "+":
        return _collective_pair(basis, coeffs, +1)
    if sign == "-":
        return _collective_pair(basis, coeffs, -1)
    if sign == "0":
        if params.kind is FieldKind.DEGENERATE_S:
            raise ValueError("S(x) has no diagonal component")
        out = coeffs[0] * weight_operator(basis, 0)
        for j in range(1, scheme.n):
            out = out + coeffs[j] * weight_operator(basis, j)
        return out
    raise ValueError(f"sign must be '+', '-' or '0', got {sign!r}")


def hamiltonian_from_fields(scheme: LevelScheme, basis: QuasispinBasis) -> LinearOperator:
    """H_D written as -|G| S^+(0) S^-(0)."""
    down = build_pair_field(scheme, basis, PairFieldParams.degenerate(0.0), "-")
    up = build_pair_field(scheme, basis.shifted(-1), PairFieldParams.degenerate(0.0), "+")
    return -scheme.g * (up @ down)


def _require_unrestricted(basis: QuasispinBasis, what: str):
    if basis.restricted:
        raise SchemeError(f"{what} mixes pair-number sectors; use the unrestricted basis", "unrestricted basis")


def build_half_rotation_T(scheme: LevelScheme, basis: QuasispinBasis) -> LinearOperator:
    """T = exp(-i pi sum_j S_j^x), built level by level without expm.

    For spin s, exp(-i pi S^x) |s, m> = exp(-i pi s) |s, -m>, so T flips every
    occupation N_j -> Omega_j - N_j with a global phase.
    """
    _require_unrestricted(basis, "T")
    omegas = scheme.omegas
    phase = cmath.exp(-1j * np.pi * omegas.sum() / 2.0)
    rows = [basis.index[tuple(omegas - occ)] for occ in basis.occupations]
    cols = np.arange(basis.dim)
    mat = sp.csr_matrix((np.full(basis.dim, phase), (rows, cols)), shape=(basis.dim, basis.dim))
    return LinearOperator(mat, basis, basis)


def build_symmetry_B(scheme: LevelScheme, basis: QuasispinBasis) -> LinearOperator:
    """B = T^dagger S^-(0); maps N particle pairs to N-1 hole pairs."""
    _require_unrestricted(basis, "B")
    if scheme.mode is not Mode.DEGENERATE:
        raise SchemeError("B is defined for the degenerate case only", "mode=degenerate")
    t = build_half_rotation_T(scheme, basis)
    return t.H @ build_pair_field(scheme, basis, PairFieldParams.degenerate(0.0), "-")


@dataclass(frozen=True, eq=False)
class OperatorSet:
    """Hamiltonian, invariant family and pair-number operator on one basis."""

    scheme: LevelScheme
    basis: QuasispinBasis
    hamiltonian: LinearOperator
    invariants: tuple[LinearOperator, ...]
    number_op: LinearOperator

    @property
    def invariant_name(self) -> str:
        return "R" if self.scheme.mode is Mode.REDUCED else "P"


def build_operator_set(scheme: LevelScheme, basis: QuasispinBasis) -> OperatorSet:
    if scheme.mode is Mode.REDUCED:
        inv = build_gaudin_magnets(scheme, basis)
    elif scheme.mode is Mode.DEGENERATE:
        inv = build_degenerate_invariants(scheme, basis)
    else:
        inv = []
    return OperatorSet(
        scheme,
        basis,
        build_hamiltonian(scheme, basis),
        tuple(inv),
        pair_number_operator(scheme, basis),
    )


@functools.lru_cache(maxsize=128)
def sector_operator_set(scheme: LevelScheme, sector: int | None) -> OperatorSet:
    """Cached operator set on one pair-number sector (None: all sectors)."""
    return build_operator_set(scheme, build_basis(scheme, sector))


# Reconstruction identities. Each returns the right-hand side as an operator.

def hamiltonian_from_invariants(ops: OperatorSet) -> LinearOperator:
    """|G| sum c_j^2 P_j (degenerate) or the quadratic R_j expression (reduced)."""
    scheme, basis = ops.scheme, ops.basis
    if scheme.mode is Mode.DEGENERATE:
        out = zero_operator(basis)
        for cj, p in zip(scheme.cs, ops.invariants):
            out = out + scheme.g * cj**2 * p
        return out
    if scheme.mode is Mode.REDUCED:
        gd = scheme.g * scheme.d
        eps, omegas = scheme.epsilons, scheme.omegas
        total = zero_operator(basis)
        for r in ops.invariants:
            total = total + r
        out = gd * (total @ total) + float(eps @ omegas) * identity(basis)
        for j, r in enumerate(ops.invariants):
            out = out + (2.0 * eps[j] - gd) * r - gd * spin_dot(basis, j, j)
        return out
    raise SchemeError("general mode has no invariant family", "mode in {reduced, degenerate}")


def number_from_invariants(ops: OperatorSet) -> LinearOperator:
    """sum_j (R_j + Omega_j/2); reduced mode only."""
    if ops.scheme.mode is not Mode.REDUCED:
        raise SchemeError("N from invariants is a reduced-mode identity", "mode=reduced")
    out = 0.5 * ops.scheme.n_max * identity(ops.basis)
    for r in ops.invariants:
        out = out + r
    return out


def invariant_sum_formula(ops: OperatorSet) -> LinearOperator:
    """N^2 - N (N_max + 1) + 1/4 sum_{j != k} Omega_j Omega_k, which equals sum_j P_j."""
    omegas = ops.scheme.omegas
    cross = 0.25 * (omegas.sum() ** 2 - (omegas**2).sum())
    n_op = ops.number_op
    return n_op @ n_op - (ops.scheme.n_max + 1) * n_op + cross * identity(ops.basis)
