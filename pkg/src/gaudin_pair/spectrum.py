"""Bethe eigenstates, closed-form eigenvalues and per-sector spectrum records.

Degenerate mode assembles the spectrum from four kinds of states:

    empty       |0>                                      sector 0
    talmi_zero  S^+(0) S^+(z_1)...S^+(z_{N-1}) |0>        N <= N_max/2
    generic     S^+(x_1)...S^+(x_N) |0>                  N <= N_max/2
    hole_zero   S^-(z_1)...S^-(z_{N-1}) |full>           sector N_max - N + 1

where the hole states are the B-images of the talmi states (the image of
the one-pair talmi state is the full shell, class ``full``).  Reduced mode
uses Richardson states J^+(xi_1)...J^+(xi_N)|0> (class ``richardson``).
"""

from __future__ import annotations

import enum
import logging
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .bethe import BetheError, BetheProblem, BetheSolution, Family, solve
from .hilbert import (
    LevelScheme,
    Mode,
    QuasispinBasis,
    SchemeError,
    StateVector,
    build_basis,
    embed_state,
    full_shell_state,
    vacuum_state,
)
from .operators import PairFieldParams, build_pair_field, build_symmetry_B, sector_operator_set

log = logging.getLogger(__name__)

# Largest imaginary part tolerated in an eigenvalue built from conjugate roots.
IMAG_TOL = 1e-9


class RecordClass(str, enum.Enum):
    EMPTY = "empty"
    TALMI_ZERO = "talmi_zero"
    GENERIC = "generic"
    HOLE_ZERO = "hole_zero"
    FULL = "full"
    RICHARDSON = "richardson"


class InvalidStateError(ArithmeticError):
    """A Bethe product vanished, so the roots do not define a state."""


@dataclass(frozen=True, eq=False)
class EigenRecord:
    sector: int
    cls: RecordClass
    roots: tuple[complex, ...]
    invariant_eigenvalues: tuple[float, ...]
    energy: float
    state: StateVector
    residuals: tuple[float, ...]
    energy_residual: float
    bae_residual: float = 0.0

    @property
    def norm(self) -> float:
        return self.state.norm()

    @property
    def max_residual(self) -> float:
        return max((*self.residuals, self.energy_residual))


@dataclass(frozen=True)
class AnnihilationCertificate:
    """Evidence that B maps a generic-class state to zero."""

    sector: int
    relative_norm: float

    @property
    def holds(self) -> bool:
        return self.relative_norm < 1e-10


@dataclass(frozen=True)
class OracleComparison:
    matched: int
    unmatched_bethe: tuple[tuple[int, float], ...]
    oracle_dim: int
    covered: int

    @property
    def coverage(self) -> float:
        return self.covered / self.oracle_dim if self.oracle_dim else 1.0


@dataclass
class SpectrumReport:
    scheme: LevelScheme
    records: list[EigenRecord]
    comparison: dict[int, OracleComparison] = field(default_factory=dict)
    unsolved_sectors: list[int] = field(default_factory=list)

    def __post_init__(self):
        self.records.sort(key=lambda r: (r.sector, r.energy, r.cls.value))

    def sector(self, n: int) -> list[EigenRecord]:
        return [r for r in self.records if r.sector == n]

    @property
    def coverage(self) -> float:
        dim = sum(c.oracle_dim for c in self.comparison.values())
        return sum(c.covered for c in self.comparison.values()) / dim if dim else 1.0

    @property
    def all_matched(self) -> bool:
        return all(not c.unmatched_bethe for c in self.comparison.values())


# Closed-form eigenvalues

def _require_solvable(scheme: LevelScheme):
    if scheme.mode is Mode.GENERAL:
        raise SchemeError("closed forms need mode=reduced or mode=degenerate", "mode in {reduced, degenerate}")


def empty_shell_eigenvalues(scheme: LevelScheme) -> np.ndarray:
    """Invariant eigenvalues E_j^(0) on the empty shell."""
    _require_solvable(scheme)
    omegas = scheme.omegas.astype(float)
    out = np.zeros(scheme.n)
    if scheme.mode is Mode.DEGENERATE:
        c2 = scheme.cs**2
        for j in range(scheme.n):
            others = np.arange(scheme.n) != j
            out[j] = 0.5 * omegas[j] * np.sum(omegas[others] / (1.0 - c2[j] / c2[others]))
        return out
    gd = scheme.g * scheme.d
    eps = scheme.epsilons
    for j in range(scheme.n):
        others = np.arange(scheme.n) != j
        out[j] = -0.5 * omegas[j] - 0.25 * gd * np.sum(omegas[j] * omegas[others] / (eps[j] - eps[others]))
    return out


def _realify(values: np.ndarray, what: str) -> np.ndarray:
    if np.max(np.abs(values.imag), initial=0.0) > IMAG_TOL * max(1.0, np.max(np.abs(values))):
        raise ArithmeticError(f"{what} has imaginary part {np.max(np.abs(values.imag)):.3g}")
    return values.real.copy()


def invariant_eigenvalues(
    scheme: LevelScheme, cls: RecordClass | str, roots: Sequence[complex], pair_count: int
) -> np.ndarray:
    """Per-level invariant eigenvalues of a Bethe state from its roots.

    ``roots`` are the free roots: z_1..z_{N-1} for talmi/hole states,
    x_1..x_N for generic states and xi_1..xi_N for Richardson states.
    """
    cls = RecordClass(cls)
    e0 = empty_shell_eigenvalues(scheme).astype(complex)
    omegas = scheme.omegas.astype(float)
    r = np.asarray(roots, dtype=complex).reshape(-1)
    if cls is RecordClass.EMPTY:
        return e0.real
    if cls is RecordClass.RICHARDSON:
        poles = 2.0 * scheme.epsilons
        _check_poles(poles, r)
        shift = scheme.g * scheme.d * (omegas[:, None] / (poles[:, None] - r[None, :])).sum(axis=1)
        return _realify(e0 + shift, "Richardson eigenvalue")
    c2 = scheme.cs**2
    _check_poles(1.0 / c2, r)
    bare = (omegas[:, None] / (1.0 - c2[:, None] * r[None, :])).sum(axis=1)
    if cls is RecordClass.GENERIC:
        return _realify(e0 - bare, "generic-class eigenvalue")
    # talmi, hole and full states carry the fixed root at 0
    return _realify(e0 - omegas - bare, "zero-class eigenvalue")


def _check_poles(poles: np.ndarray, roots: np.ndarray, tol: float = 1e-12):
    if roots.size and np.min(np.abs(poles[:, None] - roots[None, :])) < tol:
        raise BetheError("root sits on a pole")


def energy_from_invariants(
    scheme: LevelScheme, values: Sequence[float], roots: Sequence[complex] | None = None
) -> float:
    """Energy of a Bethe state from its invariant eigenvalues.

    Degenerate: |G| sum c_j^2 e_j.  Reduced: sum of roots when given, after
    checking it against the quadratic reconstruction in the R_j eigenvalues.
    """
    _require_solvable(scheme)
    e = np.asarray(values, dtype=float)
    if scheme.mode is Mode.DEGENERATE:
        return float(scheme.g * np.sum(scheme.cs**2 * e))
    gd = scheme.g * scheme.d
    omegas, eps = scheme.omegas.astype(float), scheme.epsilons
    casimir = 0.5 * omegas * (0.5 * omegas + 1.0)
    rebuilt = float(np.sum((2 * eps - gd) * e) + gd * e.sum() ** 2 - gd * casimir.sum() + eps @ omegas)
    if roots is None:
        return rebuilt
    from_roots = float(np.sum(np.asarray(roots, dtype=complex)).real)
    if abs(from_roots - rebuilt) > 1e-8 * max(1.0, abs(rebuilt)):
        raise ArithmeticError(f"sum of roots {from_roots} disagrees with reconstruction {rebuilt}")
    return from_roots


# States

def _apply_fields(scheme: LevelScheme, state: StateVector, params: list[PairFieldParams], sign: str) -> StateVector:
    for p in params:
        state = build_pair_field(scheme, state.basis, p, sign) @ state
    return state


def _factors(cls: RecordClass, roots: np.ndarray) -> tuple[list[PairFieldParams], str]:
    if cls is RecordClass.RICHARDSON:
        return [PairFieldParams.richardson(r) for r in roots], "+"
    if cls is RecordClass.GENERIC:
        return [PairFieldParams.degenerate(r) for r in roots], "+"
    if cls is RecordClass.TALMI_ZERO:
        return [PairFieldParams.degenerate(0.0)] + [PairFieldParams.degenerate(r) for r in roots], "+"
    if cls is RecordClass.HOLE_ZERO:
        return [PairFieldParams.degenerate(r) for r in roots], "-"
    return [], "+"


def _start_state(scheme: LevelScheme, cls: RecordClass) -> StateVector:
    if cls in (RecordClass.HOLE_ZERO, RecordClass.FULL):
        return full_shell_state(build_basis(scheme, scheme.n_max))
    return vacuum_state(build_basis(scheme, 0))


def build_bethe_state(
    scheme: LevelScheme,
    basis: QuasispinBasis | None,
    cls: RecordClass | str,
    roots: Sequence[complex],
    check_order: bool = True,
) -> StateVector:
    """Apply the ordered pair-field product of a record class to its reference state.

    The product is computed sector by sector.  The result lives on ``basis``
    when it is the unrestricted basis, otherwise on the sector it lands in.
    Factors commute; with ``check_order`` one reversed product is compared.
    """
    cls = RecordClass(cls)
    r = np.asarray(roots, dtype=complex).reshape(-1)
    params, sign = _factors(cls, r)
    state = _apply_fields(scheme, _start_state(scheme, cls), params, sign)
    scale = max(1.0, float(np.prod([max(1.0, np.abs(_field_scale(scheme, p))) for p in params])))
    if state.norm() <= 1e-12 * scale:
        raise InvalidStateError(f"{cls.value} product with roots {list(r)} vanishes")
    if check_order and len(params) > 1:
        other = _apply_fields(scheme, _start_state(scheme, cls), params[::-1], sign)
        if (other - state).norm() > 1e-9 * state.norm():
            raise ArithmeticError("pair-field factors failed to commute")
    if basis is not None and not basis.restricted:
        return embed_state(state, basis)
    if basis is not None and basis.sector != state.basis.sector:
        raise SchemeError(
            f"{cls.value} state lives in sector {state.basis.sector}, not {basis.sector}", "matching sector"
        )
    return state


def _field_scale(scheme: LevelScheme, params: PairFieldParams) -> float:
    """Largest coefficient of a pair field; sets the scale for a vanishing test."""
    return float(np.max(np.abs(params.coefficients(scheme))))


def _invariant_residuals(scheme: LevelScheme, state: StateVector, values, energy: float):
    ops = sector_operator_set(scheme, state.basis.sector)
    nrm = state.norm()
    res = tuple(float((op @ state - e * state).norm() / nrm) for op, e in zip(ops.invariants, values))
    return res, float((ops.hamiltonian @ state - energy * state).norm() / nrm)


def rayleigh_quotients(scheme: LevelScheme, state: StateVector) -> np.ndarray:
    """<psi|I_j|psi>/<psi|psi> for each invariant I_j of the scheme's mode."""
    ops = sector_operator_set(scheme, state.basis.sector)
    nrm2 = state.norm()**2
    return np.array([(state.vdot(op @ state) / nrm2).real for op in ops.invariants])


def make_record(
    scheme: LevelScheme, cls: RecordClass | str, roots: Sequence[complex], pair_count: int, bae_residual: float = 0.0
) -> EigenRecord:
    """Build the state for ``roots`` and evaluate its closed-form eigenvalues."""
    cls = RecordClass(cls)
    roots = tuple(complex(r) for r in roots)
    state = build_bethe_state(scheme, None, cls, roots)
    values = invariant_eigenvalues(scheme, cls, roots, pair_count)
    energy = energy_from_invariants(scheme, values, roots if cls is RecordClass.RICHARDSON else None)
    res, e_res = _invariant_residuals(scheme, state, values, energy)
    return EigenRecord(
        state.basis.sector, cls, roots, tuple(float(v) for v in values), energy, state, res, e_res, bae_residual
    )


def hole_sector_map(record: EigenRecord) -> EigenRecord | AnnihilationCertificate:
    """Image of a particle record under B = T^dagger S^-(0).

    A talmi record with N pairs maps to the hole record with N-1 hole pairs
    (sector N_max - N + 1) and the same invariant eigenvalues.  A generic
    record is annihilated; the certificate carries ||B psi|| / ||psi||.
    """
    scheme = record.state.basis.scheme
    full = build_basis(scheme, None)
    b_psi = build_symmetry_B(scheme, full) @ embed_state(record.state, full)
    rel = b_psi.norm() / record.state.norm()
    if record.cls is RecordClass.GENERIC:
        return AnnihilationCertificate(record.sector, rel)
    if record.cls is not RecordClass.TALMI_ZERO:
        raise ValueError(f"hole map is defined for talmi_zero and generic records, got {record.cls.value}")
    if rel < 1e-10:
        raise ArithmeticError(f"B annihilated the talmi record in sector {record.sector}")
    cls = RecordClass.FULL if record.sector == 1 else RecordClass.HOLE_ZERO
    hole = make_record(scheme, cls, record.roots, record.sector, record.bae_residual)
    # The constructed hole state must be parallel to B psi.
    overlap = abs(embed_state(hole.state, full).vdot(b_psi)) / (hole.state.norm() * b_psi.norm())
    if abs(1.0 - overlap) > 1e-8:
        raise ArithmeticError(f"hole state is not parallel to the B image (overlap {overlap})")
    return hole


# Assembly

def _solutions(scheme: LevelScheme, family: Family, n: int, **solver) -> list[BetheSolution]:
    return solve(BetheProblem(scheme, family, n, **solver))


def _records_from(scheme, cls, solutions, n) -> list[EigenRecord]:
    out = []
    for sol in solutions:
        try:
            out.append(make_record(scheme, cls, sol.roots, n, sol.residual))
        except InvalidStateError as exc:
            log.warning("dropping solution: %s", exc)
    return out


def sector_records(scheme: LevelScheme, n: int, **solver) -> list[EigenRecord]:
    """All Bethe records the solvers produce in pair-number sector ``n``."""
    _require_solvable(scheme)
    if n == 0:
        return [make_record(scheme, RecordClass.EMPTY, (), 0)]
    if scheme.mode is Mode.REDUCED:
        return _records_from(scheme, RecordClass.RICHARDSON, _solutions(scheme, Family.RICHARDSON, n, **solver), n)
    if 2 * n <= scheme.n_max:
        generic = _solutions(scheme, Family.DEGENERATE_GENERIC, n, **solver)
        zero = _solutions(scheme, Family.DEGENERATE_ZERO, n, **solver)
        return _records_from(scheme, RecordClass.GENERIC, generic, n) + _records_from(
            scheme, RecordClass.TALMI_ZERO, zero, n
        )
    # Upper half: hole images of the talmi records with N_max - n + 1 pairs.
    particle = scheme.n_max - n + 1
    zero = _solutions(scheme, Family.DEGENERATE_ZERO, particle, **solver)
    cls = RecordClass.FULL if particle == 1 else RecordClass.HOLE_ZERO
    return _records_from(scheme, cls, zero, particle)


def compare_with_oracle(records: Sequence[EigenRecord], oracle_spectrum, tol: float = 1e-8) -> OracleComparison:
    """Match each record's (energy, e_1..e_n) tuple to an oracle eigenvector.

    Each oracle eigenvector may be claimed once, so coverage counts distinct
    joint eigenstates reproduced by the Bethe records.
    """
    table = oracle_spectrum.joint_table()
    claimed = np.zeros(len(table), dtype=bool)
    unmatched = []
    matched = 0
    for rec in records:
        target = np.array([rec.energy, *rec.invariant_eigenvalues])
        dist = np.max(np.abs(table - target) / np.maximum(1.0, np.abs(target)), axis=1)
        free = np.flatnonzero((dist <= tol) & ~claimed)
        hit = np.flatnonzero(dist <= tol)
        if hit.size:
            matched += 1
            if free.size:
                claimed[free[0]] = True
        else:
            unmatched.append((rec.sector, rec.energy))
    return OracleComparison(matched, tuple(unmatched), len(table), int(claimed.sum()))


def assemble_spectrum(
    scheme: LevelScheme,
    sectors: Sequence[int] | None = None,
    oracle: bool = True,
    **solver,
) -> SpectrumReport:
    """Bethe records for the requested sectors, optionally checked against exact diagonalization."""
    from .oracle import exact_diagonalize_sector

    sectors = range(scheme.n_max + 1) if sectors is None else sectors
    records: list[EigenRecord] = []
    comparison: dict[int, OracleComparison] = {}
    unsolved: list[int] = []
    for n in sectors:
        recs = sector_records(scheme, n, **solver)
        if not recs:
            unsolved.append(n)
        records.extend(recs)
        if oracle:
            exact = exact_diagonalize_sector(sector_operator_set(scheme, n), n)
            comparison[n] = compare_with_oracle(recs, exact)
    return SpectrumReport(scheme, records, comparison, unsolved)
