"""Seniority-zero quasispin Hilbert space.

Each level j carries the spin-(Omega_j/2) irrep of its quasispin algebra.
States are labelled by occupation tuples (N_1, ..., N_n) with
0 <= N_j <= Omega_j; the su(2) weight is m_j = N_j - Omega_j/2.  For nuclear
shells Omega_j = j + 1/2, but here Omega_j is simply an input integer.
"""

from __future__ import annotations

import enum
import functools
import itertools
import logging
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg  # noqa: F401  (registers sp.linalg)

log = logging.getLogger(__name__)

# Minimum separation of c_j^2 (degenerate) or eps_j (reduced); both appear in
# denominators of the invariants.
DISTINCT_TOL = 1e-9


class SchemeError(ValueError):
    """A LevelScheme violates one of its invariants.

    ``invariant`` names the violated rule and ``level`` the offending level
    index (0-based) when there is one.
    """

    def __init__(self, message: str, invariant: str, level: int | None = None):
        super().__init__(message)
        self.invariant = invariant
        self.level = level


class Mode(str, enum.Enum):
    GENERAL = "general"
    REDUCED = "reduced"
    DEGENERATE = "degenerate"


@dataclass(frozen=True)
class Level:
    omega: int
    epsilon: float = 0.0
    c: float = 1.0


@dataclass(frozen=True)
class LevelScheme:
    """Model input: levels, overall coupling |G| and the solvable-case flag.

    The amplitudes c_j are rescaled on construction so that sum c_j^2 = 1.
    """

    levels: tuple[Level, ...]
    g: float = 1.0
    mode: Mode = Mode.GENERAL
    c_scale: float = field(default=1.0, compare=False)

    def __post_init__(self):
        levels = tuple(
            lv if isinstance(lv, Level) else Level(*lv) for lv in self.levels
        )
        object.__setattr__(self, "mode", Mode(self.mode))
        if not levels:
            raise SchemeError("a scheme needs at least one level", "n >= 1")
        for i, lv in enumerate(levels):
            if int(lv.omega) != lv.omega or lv.omega < 1:
                raise SchemeError(
                    f"level {i + 1}: omega must be a positive integer, got {lv.omega}",
                    "omega >= 1",
                    i,
                )
            if not lv.c > 0:
                raise SchemeError(
                    f"level {i + 1}: amplitude c must be positive, got {lv.c}",
                    "c > 0",
                    i,
                )
            if not math.isfinite(lv.epsilon):
                raise SchemeError(f"level {i + 1}: epsilon is not finite", "finite epsilon", i)
        if not (self.g >= 0 and math.isfinite(self.g)):
            raise SchemeError(f"coupling g must be a finite nonnegative number, got {self.g}", "g >= 0")

        norm = math.sqrt(sum(lv.c**2 for lv in levels))
        if abs(norm - 1.0) > 1e-15:
            log.info("normalizing amplitudes c_j by factor %.17g", 1.0 / norm)
        levels = tuple(Level(int(lv.omega), float(lv.epsilon), lv.c / norm) for lv in levels)
        object.__setattr__(self, "levels", levels)
        object.__setattr__(self, "c_scale", 1.0 / norm)
        self._check_mode()

    def _check_mode(self):
        n = len(self.levels)
        if self.mode is Mode.REDUCED:
            c0 = self.levels[0].c
            for i, lv in enumerate(self.levels):
                if abs(lv.c - c0) > DISTINCT_TOL:
                    raise SchemeError(
                        f"reduced mode needs equal amplitudes; level {i + 1} has c={lv.c:.6g} != {c0:.6g}",
                        "reduced: equal c_j",
                        i,
                    )
            for i, k in itertools.combinations(range(n), 2):
                if abs(self.levels[i].epsilon - self.levels[k].epsilon) <= DISTINCT_TOL:
                    raise SchemeError(
                        f"reduced mode needs distinct energies; levels {i + 1} and {k + 1} coincide",
                        "reduced: distinct epsilon_j",
                        k,
                    )
        elif self.mode is Mode.DEGENERATE:
            e0 = self.levels[0].epsilon
            for i, lv in enumerate(self.levels):
                if abs(lv.epsilon - e0) > DISTINCT_TOL:
                    raise SchemeError(
                        f"degenerate mode needs equal energies; level {i + 1} has epsilon={lv.epsilon:.6g} != {e0:.6g}",
                        "degenerate: equal epsilon_j",
                        i,
                    )
            for i, k in itertools.combinations(range(n), 2):
                if abs(self.levels[i].c ** 2 - self.levels[k].c ** 2) <= DISTINCT_TOL:
                    raise SchemeError(
                        f"degenerate mode needs distinct c_j^2; levels {i + 1} and {k + 1} coincide",
                        "degenerate: distinct c_j^2",
                        k,
                    )

    @property
    def n(self) -> int:
        return len(self.levels)

    @property
    def omegas(self) -> np.ndarray:
        return np.array([lv.omega for lv in self.levels], dtype=int)

    @property
    def epsilons(self) -> np.ndarray:
        return np.array([lv.epsilon for lv in self.levels], dtype=float)

    @property
    def cs(self) -> np.ndarray:
        return np.array([lv.c for lv in self.levels], dtype=float)

    @property
    def n_max(self) -> int:
        return int(self.omegas.sum())

    @property
    def d(self) -> float:
        """Level spacing 1/n of the reduced model."""
        return 1.0 / self.n

    def permuted(self, order: Sequence[int]) -> "LevelScheme":
        return LevelScheme(tuple(self.levels[i] for i in order), self.g, self.mode)


@dataclass(frozen=True)
class QuasispinBasis:
    """Product basis, optionally restricted to a total pair number.

    Ordering is lexicographic in the occupation tuple, which is the same as
    lexicographic in the weight tuple.  A sector outside [0, N_max] is an
    empty basis; it only arises as the target of a ladder operator.
    """

    scheme: LevelScheme
    sector: int | None = None
    occupations: np.ndarray = field(init=False, repr=False, compare=False)
    index: dict = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        ranges = [range(o + 1) for o in self.scheme.omegas]
        states = [
            t for t in itertools.product(*ranges) if self.sector is None or sum(t) == self.sector
        ]
        occ = np.array(states, dtype=int).reshape(len(states), self.scheme.n)
        object.__setattr__(self, "occupations", occ)
        object.__setattr__(self, "index", {t: i for i, t in enumerate(states)})

    @property
    def dim(self) -> int:
        return len(self.occupations)

    @property
    def states(self) -> list[tuple[float, ...]]:
        """Weight tuples (m_1, ..., m_n)."""
        half = self.scheme.omegas / 2.0
        return [tuple(row - half) for row in self.occupations]

    @property
    def restricted(self) -> bool:
        return self.sector is not None

    def shifted(self, delta: int) -> "QuasispinBasis":
        """Basis reached by a ladder operator changing N by ``delta``."""
        if self.sector is None:
            return self
        return _cached_basis(self.scheme, self.sector + delta)

    def pair_counts(self) -> np.ndarray:
        return self.occupations.sum(axis=1)


@functools.lru_cache(maxsize=256)
def _cached_basis(scheme: LevelScheme, sector: int | None) -> QuasispinBasis:
    return QuasispinBasis(scheme, sector)


def build_basis(scheme: LevelScheme, sector: int | None = None) -> QuasispinBasis:
    if sector is not None and not 0 <= sector <= scheme.n_max:
        raise SchemeError(
            f"pair number {sector} outside [0, {scheme.n_max}]", "0 <= N <= N_max"
        )
    return _cached_basis(scheme, sector)


@dataclass(frozen=True, eq=False)
class StateVector:
    basis: QuasispinBasis
    amplitudes: np.ndarray

    def __post_init__(self):
        amp = np.asarray(self.amplitudes, dtype=complex)
        if amp.shape != (self.basis.dim,):
            raise ValueError(f"amplitude length {amp.shape} != basis dimension {self.basis.dim}")
        object.__setattr__(self, "amplitudes", amp)

    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def normalized(self) -> "StateVector":
        nrm = self.norm()
        if nrm == 0:
            raise ZeroDivisionError("cannot normalize the zero vector")
        return StateVector(self.basis, self.amplitudes / nrm)

    def vdot(self, other: "StateVector") -> complex:
        _check_same(self.basis, other.basis)
        return complex(np.vdot(self.amplitudes, other.amplitudes))

    def __add__(self, other):
        _check_same(self.basis, other.basis)
        return StateVector(self.basis, self.amplitudes + other.amplitudes)

    def __sub__(self, other):
        _check_same(self.basis, other.basis)
        return StateVector(self.basis, self.amplitudes - other.amplitudes)

    def __mul__(self, scalar):
        return StateVector(self.basis, self.amplitudes * scalar)

    __rmul__ = __mul__

    def sector_weights(self) -> dict[int, float]:
        """Squared norm carried by each pair-number sector."""
        counts = self.basis.pair_counts()
        probs = np.abs(self.amplitudes) ** 2
        return {int(k): float(probs[counts == k].sum()) for k in np.unique(counts)}


def _check_same(a: QuasispinBasis, b: QuasispinBasis):
    if a != b:
        raise ValueError(f"basis mismatch: sector {a.sector} vs {b.sector}")


@dataclass(frozen=True, eq=False)
class LinearOperator:
    """Sparse complex matrix mapping ``domain`` to ``codomain``."""

    matrix: sp.csr_matrix
    domain: QuasispinBasis
    codomain: QuasispinBasis

    def __post_init__(self):
        m = sp.csr_matrix(self.matrix, dtype=complex)
        if m.shape != (self.codomain.dim, self.domain.dim):
            raise ValueError(f"matrix shape {m.shape} does not match bases")
        object.__setattr__(self, "matrix", m)

    @property
    def shape(self):
        return self.matrix.shape

    def toarray(self) -> np.ndarray:
        return self.matrix.toarray()

    def norm(self) -> float:
        return float(sp.linalg.norm(self.matrix)) if self.matrix.nnz else 0.0

    @property
    def H(self) -> "LinearOperator":
        return LinearOperator(self.matrix.conj().T.tocsr(), self.codomain, self.domain)

    def __matmul__(self, other):
        if isinstance(other, StateVector):
            _check_same(self.domain, other.basis)
            return StateVector(self.codomain, self.matrix @ other.amplitudes)
        if isinstance(other, LinearOperator):
            _check_same(self.domain, other.codomain)
            return LinearOperator(self.matrix @ other.matrix, other.domain, self.codomain)
        return NotImplemented

    def _same_shape(self, other: "LinearOperator"):
        _check_same(self.domain, other.domain)
        _check_same(self.codomain, other.codomain)

    def __add__(self, other):
        if isinstance(other, (int, float, complex)):
            return self + other * identity(self.domain)
        self._same_shape(other)
        return LinearOperator(self.matrix + other.matrix, self.domain, self.codomain)

    __radd__ = __add__

    def __sub__(self, other):
        return self + (-1) * other

    def __rsub__(self, other):
        return (-1) * self + other

    def __mul__(self, scalar):
        return LinearOperator(self.matrix * scalar, self.domain, self.codomain)

    __rmul__ = __mul__

    def __neg__(self):
        return self * -1

    def __truediv__(self, scalar):
        return self * (1.0 / scalar)

    def is_hermitian(self, tol: float = 1e-12) -> bool:
        if self.domain != self.codomain:
            return False
        diff = self.matrix - self.matrix.conj().T
        return (float(sp.linalg.norm(diff)) if diff.nnz else 0.0) <= tol * max(1.0, self.norm())


def identity(basis: QuasispinBasis) -> LinearOperator:
    return LinearOperator(sp.identity(basis.dim, dtype=complex, format="csr"), basis, basis)


def diagonal(basis: QuasispinBasis, values: np.ndarray) -> LinearOperator:
    return LinearOperator(sp.diags(np.asarray(values, dtype=complex), format="csr"), basis, basis)


def zero_operator(domain: QuasispinBasis, codomain: QuasispinBasis | None = None) -> LinearOperator:
    codomain = domain if codomain is None else codomain
    return LinearOperator(sp.csr_matrix((codomain.dim, domain.dim), dtype=complex), domain, codomain)


def commutator(a: LinearOperator, b: LinearOperator) -> LinearOperator:
    return a @ b - b @ a


def relative_commutator_norm(a: LinearOperator, b: LinearOperator) -> float:
    """||[A, B]||_F / (||A||_F ||B||_F), zero when either factor vanishes."""
    scale = a.norm() * b.norm()
    return commutator(a, b).norm() / scale if scale else 0.0


@functools.lru_cache(maxsize=4096)
def ladder(basis: QuasispinBasis, j: int, sign: int) -> LinearOperator:
    """S_j^+ (sign=+1) or S_j^- (sign=-1) from ``basis`` to its N+sign neighbour."""
    target = basis.shifted(sign)
    omega = basis.scheme.omegas[j]
    rows, cols, vals = [], [], []
    for col, occ in enumerate(basis.occupations):
        nj = occ[j]
        new = nj + sign
        if not 0 <= new <= omega:
            continue
        key = tuple(occ[:j]) + (new,) + tuple(occ[j + 1:])
        row = target.index.get(key)
        if row is None:
            continue
        # <s, m+1|S^+|s, m> = sqrt((Omega - N)(N + 1)); S^- is its transpose.
        amp = math.sqrt((omega - nj) * (nj + 1)) if sign > 0 else math.sqrt(nj * (omega - nj + 1))
        rows.append(row)
        cols.append(col)
        vals.append(amp)
    mat = sp.csr_matrix((vals, (rows, cols)), shape=(target.dim, basis.dim), dtype=complex)
    return LinearOperator(mat, basis, target)


def weight_operator(basis: QuasispinBasis, j: int) -> LinearOperator:
    """S_j^0, diagonal with eigenvalue m_j."""
    return diagonal(basis, basis.occupations[:, j] - basis.scheme.omegas[j] / 2.0)


@dataclass(frozen=True)
class LevelGenerators:
    plus: LinearOperator
    minus: LinearOperator
    zero: LinearOperator


def quasispin_generators(scheme: LevelScheme, basis: QuasispinBasis) -> list[LevelGenerators]:
    """(S_j^+, S_j^-, S_j^0) for every level.

    On a sector basis the ladder operators are the rectangular blocks into
    the N+1 and N-1 sectors.
    """
    if basis.scheme != scheme:
        raise ValueError("basis was built from a different scheme")
    return [
        LevelGenerators(ladder(basis, j, +1), ladder(basis, j, -1), weight_operator(basis, j))
        for j in range(scheme.n)
    ]


def pair_number_operator(scheme: LevelScheme, basis: QuasispinBasis) -> LinearOperator:
    return diagonal(basis, basis.pair_counts().astype(float))


def _unit(basis: QuasispinBasis, occ: tuple[int, ...]) -> StateVector:
    amp = np.zeros(basis.dim, dtype=complex)
    amp[basis.index[occ]] = 1.0
    return StateVector(basis, amp)


def vacuum_state(basis: QuasispinBasis) -> StateVector:
    """Empty shell |0>: every level at its lowest weight."""
    if basis.sector not in (None, 0):
        raise SchemeError(f"empty shell lives in sector 0, basis is sector {basis.sector}", "sector N=0")
    return _unit(basis, (0,) * basis.scheme.n)


def full_shell_state(basis: QuasispinBasis) -> StateVector:
    """Fully occupied shell: every level at its highest weight."""
    n_max = basis.scheme.n_max
    if basis.sector not in (None, n_max):
        raise SchemeError(
            f"full shell lives in sector {n_max}, basis is sector {basis.sector}", "sector N=N_max"
        )
    return _unit(basis, tuple(int(o) for o in basis.scheme.omegas))


def sector_embedding(full: QuasispinBasis, sector: QuasispinBasis) -> np.ndarray:
    """Indices of ``sector`` states inside the unrestricted basis ``full``."""
    if full.restricted:
        raise ValueError("embedding target must be the unrestricted basis")
    return np.array([full.index[tuple(o)] for o in sector.occupations], dtype=int)


def restrict_operator(op: LinearOperator, sector: QuasispinBasis) -> LinearOperator:
    """Block of a number-conserving operator on one sector."""
    idx = sector_embedding(op.domain, sector)
    return LinearOperator(op.matrix[idx][:, idx], sector, sector)


def restrict_state(state: StateVector, sector: QuasispinBasis) -> StateVector:
    idx = sector_embedding(state.basis, sector)
    return StateVector(sector, state.amplitudes[idx])


def embed_state(state: StateVector, full: QuasispinBasis) -> StateVector:
    idx = sector_embedding(full, state.basis)
    amp = np.zeros(full.dim, dtype=complex)
    amp[idx] = state.amplitudes
    return StateVector(full, amp)
