"""Numerical solution of the Bethe ansatz equations.

All three systems share one electrostatic form.  For unknowns x_1..x_N,

    F_m = sum_j w_j / (a_j - x_m) + sum_{k != m} 2 / (x_m - x_k) + h = 0

richardson           a_j = 2 eps_j,   w_j = Omega_j,  h = -1 / (|G| d)
degenerate_generic   a_j = 1 / c_j^2, w_j = Omega_j,  h = 0
degenerate_zero      as generic plus a pole at 0 with weight -2 (the fixed
                     root of S^+(0)), unknowns z_1..z_{N-1}

and the residual reported for a root set is max_m |F_m| / 2, i.e. the
mismatch between the two sides of the equations in their usual form.
"""

from __future__ import annotations

import enum
import itertools
import math
import logging
import warnings
from dataclasses import dataclass, field, replace

import numpy as np
from numpy.polynomial import polynomial as npoly
from scipy.optimize import linear_sum_assignment

from .hilbert import LevelScheme, Mode, SchemeError

log = logging.getLogger(__name__)


class Family(str, enum.Enum):
    RICHARDSON = "richardson"
    DEGENERATE_GENERIC = "degenerate_generic"
    DEGENERATE_ZERO = "degenerate_zero"


class BetheError(ValueError):
    pass


class BetheWarning(UserWarning):
    pass


@dataclass(frozen=True)
class BetheProblem:
    scheme: LevelScheme
    family: Family
    pair_count: int
    n_seeds: int | None = None  # default 64 * N
    max_iter: int = 200
    tol_newton: float = 1e-11
    tol_sep: float = 1e-8
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "family", Family(self.family))
        n_max = self.scheme.n_max
        if not 1 <= self.pair_count <= n_max:
            raise BetheError(f"pair count {self.pair_count} outside [1, {n_max}]")
        mode = self.scheme.mode
        if self.family is Family.RICHARDSON and mode is not Mode.REDUCED:
            raise BetheError("Richardson equations need mode=reduced")
        if self.family is not Family.RICHARDSON and mode is not Mode.DEGENERATE:
            raise BetheError(f"{self.family.value} equations need mode=degenerate")

    @property
    def n_unknowns(self) -> int:
        if self.family is Family.DEGENERATE_ZERO:
            return self.pair_count - 1
        return self.pair_count

    @property
    def seeds(self) -> int:
        return self.n_seeds if self.n_seeds is not None else 64 * self.pair_count


@dataclass(frozen=True)
class BetheSolution:
    family: Family
    roots: tuple[complex, ...]
    residual: float
    converged: bool = True
    pair_count: int = field(default=0, compare=False)

    @property
    def array(self) -> np.ndarray:
        return np.array(self.roots, dtype=complex)


@dataclass(frozen=True)
class _System:
    poles: np.ndarray
    weights: np.ndarray
    field: complex = 0.0

    def evaluate(self, x: np.ndarray, field=None):
        """F, Jacobian and per-equation term scale for a batch x of shape (S, N)."""
        h = self.field if field is None else field
        h = np.broadcast_to(np.asarray(h, dtype=complex), x.shape[:1])
        diff_p = self.poles[None, None, :] - x[:, :, None]  # (S, N, P)
        pole_terms = self.weights / diff_p
        dx = x[:, :, None] - x[:, None, :]  # (S, N, N)
        n = x.shape[1]
        eye = np.eye(n, dtype=bool)
        with np.errstate(divide="ignore", invalid="ignore"):
            inter = np.where(eye, 0.0, 2.0 / np.where(eye, 1.0, dx))
        f = pole_terms.sum(axis=2) + inter.sum(axis=2) + h[:, None]
        scale = np.abs(pole_terms).sum(axis=2) + np.abs(inter).sum(axis=2) + np.abs(h)[:, None]
        jac = np.where(eye, 0.0, inter / np.where(eye, 1.0, dx))  # 2 / (x_m - x_k)^2
        diag = (self.weights / diff_p**2).sum(axis=2) - jac.sum(axis=2)
        jac = jac + diag[:, :, None] * eye
        # Sensitivity to relative changes of the roots (componentwise backward error).
        scale = scale + np.einsum("smk,sk->sm", np.abs(jac), np.abs(x))
        return f, jac, scale

    def residual(self, x: np.ndarray, field=None) -> np.ndarray:
        f, _, scale = self.evaluate(x, field)
        # Two-sided form, relative to the terms and to the root sensitivity
        # once those exceed O(1).
        return np.max(np.abs(f) / np.maximum(1.0, scale), axis=1) / 2.0 if x.shape[1] else np.zeros(len(x))

    def pole_distance(self, x: np.ndarray) -> np.ndarray:
        return np.min(np.abs(self.poles[None, None, :] - x[:, :, None]), axis=2)


def _system(scheme: LevelScheme, family: Family, g: float | None = None) -> _System:
    omegas = scheme.omegas.astype(float)
    if family is Family.RICHARDSON:
        gd = (scheme.g if g is None else g) * scheme.d
        if gd == 0:
            raise BetheError("Richardson equations need |G| > 0")
        return _System(2.0 * scheme.epsilons, omegas, -1.0 / gd)
    a = 1.0 / scheme.cs**2
    if family is Family.DEGENERATE_GENERIC:
        return _System(a, omegas, 0.0)
    return _System(np.append(a, 0.0), np.append(omegas, -2.0), 0.0)


def bae_residual(scheme: LevelScheme, family: Family | str, roots, tol_sep: float = 1e-8) -> float:
    """Max mismatch of the Bethe equations at ``roots`` (0 iff exact)."""
    family = Family(family)
    x = np.atleast_1d(np.asarray(roots, dtype=complex))
    if x.size == 0:
        return 0.0
    system = _system(scheme, family)
    dist = system.pole_distance(x[None, :])
    if np.min(dist) <= tol_sep:
        raise BetheError(f"root within {tol_sep:g} of a pole of the {family.value} equations")
    return float(system.residual(x[None, :])[0])


def _sort_roots(roots: np.ndarray, tol: float) -> np.ndarray:
    """Lexicographic (real, imag) order, treating real parts within tol as tied."""
    roots = np.asarray(roots, dtype=complex)
    order = np.argsort(roots.real, kind="stable")
    r = roots[order]
    out = []
    i = 0
    while i < len(r):
        k = i + 1
        while k < len(r) and r[k].real - r[k - 1].real <= tol:
            k += 1
        group = r[i:k]
        out.extend(group[np.argsort(group.imag, kind="stable")])
        i = k
    return np.array(out, dtype=complex)


def canonicalize(solution: BetheSolution, tol: float = 1e-8) -> BetheSolution:
    roots = _sort_roots(solution.array, tol)
    return replace(solution, roots=tuple(complex(r) for r in roots))


def same_solution(a: BetheSolution, b: BetheSolution, tol: float = 1e-8) -> bool:
    """Equality up to permutation of the roots, entrywise within ``tol``."""
    if a.family != b.family or len(a.roots) != len(b.roots):
        return False
    if not a.roots:
        return True
    ra, rb = a.array, b.array
    cost = np.abs(ra[:, None] - rb[None, :])
    rows, cols = linear_sum_assignment(cost)
    return bool(np.max(cost[rows, cols]) <= tol)


def _overfilled(system: _System, x: np.ndarray) -> np.ndarray:
    """Rows with more than Omega_j roots collapsed onto pole a_j.

    Such clusters approach the singular limit where (S_j^+)^(Omega_j+1) = 0
    kills the Bethe vector; the residual can be tiny while the state is null.
    """
    _, min_gap = _geometry(system)
    radius = 1e-3 * min_gap
    near = np.abs(system.poles[None, None, :] - x[:, :, None]) < radius  # (S, N, P)
    counts = near.sum(axis=1)
    return (counts > np.maximum(system.weights, 0)[None, :]).any(axis=1)


def _valid_rows(system: _System, x: np.ndarray, res: np.ndarray, tol: float, sep: float) -> np.ndarray:
    ok = np.isfinite(x).all(axis=1) & (res < tol)
    if x.shape[1] == 0:
        return ok
    ok &= system.pole_distance(x).min(axis=1) > sep
    ok &= ~_overfilled(system, np.nan_to_num(x))
    if x.shape[1] > 1:
        d = np.abs(x[:, :, None] - x[:, None, :])
        d[:, np.arange(x.shape[1]), np.arange(x.shape[1])] = np.inf
        ok &= d.min(axis=(1, 2)) > sep
    return ok


# Complex detour amplitudes for the continuation to infinite coupling.
STRONG_DETOURS = (1.5, -0.7)

# Multi-start seeds whose residual is above STALL_RES after STALL_ITER steps are dropped.
STALL_ITER = 60
STALL_RES = 1e-2


def _solve_linear(jac: np.ndarray, rhs: np.ndarray) -> np.ndarray:
    try:
        return np.linalg.solve(jac, rhs[..., None])[..., 0]
    except np.linalg.LinAlgError:
        out = np.empty_like(rhs)
        for i in range(len(rhs)):
            out[i] = np.linalg.lstsq(jac[i], rhs[i], rcond=None)[0]
        return out


def _newton_step(system: _System, x: np.ndarray, field=None, max_move=None):
    f, jac, _ = system.evaluate(x, field)
    with np.errstate(all="ignore"):
        step = _solve_linear(jac, -f)
    # Clip each root's move to half its distance from the nearest pole.
    limit = 0.5 * system.pole_distance(x)
    if max_move is not None:
        limit = np.minimum(limit, max_move)
    size = np.abs(step)
    with np.errstate(divide="ignore", invalid="ignore"):
        factor = np.where(size > limit, limit / size, 1.0)
    factor = np.nan_to_num(factor.min(axis=1, keepdims=True), nan=0.0)
    return x + factor * step


def _newton(system: _System, x0: np.ndarray, max_iter: int, tol: float, sep: float, radius: float):
    """Batched damped Newton.  Returns final iterates and residuals."""
    x = np.array(x0, dtype=complex)
    alive = np.ones(len(x), dtype=bool)
    res = np.full(len(x), np.inf)
    polish = np.zeros(len(x), dtype=int)
    for it in range(max_iter):
        if not alive.any():
            break
        idx = np.flatnonzero(alive)
        with np.errstate(all="ignore"):
            res[idx] = system.residual(x[idx])
        if it == STALL_ITER:
            # Damped Newton that is still far off by now rarely recovers.
            stalled = idx[res[idx] > STALL_RES]
            alive[stalled] = False
            res[stalled] = np.inf
        # A couple of extra steps after convergence to reach machine precision.
        conv = res[idx] < tol
        polish[idx[conv]] += 1
        finished = idx[conv & (polish[idx] > 2)]
        alive[finished] = False
        idx = np.flatnonzero(alive)
        if idx.size == 0:
            break
        with np.errstate(all="ignore"):
            x[idx] = _newton_step(system, x[idx], max_move=radius)
        bad = ~np.isfinite(x[idx]).all(axis=1) | (np.abs(x[idx]).max(axis=1) > 1e3 * radius)
        if x.shape[1] > 1:
            d = np.abs(x[idx][:, :, None] - x[idx][:, None, :])
            d[:, np.arange(x.shape[1]), np.arange(x.shape[1])] = np.inf
            bad |= d.min(axis=(1, 2)) < sep
        alive[idx[bad]] = False
        res[idx[bad]] = np.inf
    with np.errstate(all="ignore"):
        final = system.residual(np.nan_to_num(x))
    final[~np.isfinite(x).all(axis=1)] = np.inf
    return x, final


def _collect(
    family: Family,
    system: _System,
    candidates: np.ndarray,
    residuals: np.ndarray,
    problem: BetheProblem,
    conjugates: bool = True,
) -> list[BetheSolution]:
    """Validate, add conjugates, deduplicate and order candidate root sets."""
    tol, sep = problem.tol_newton, problem.tol_sep
    ok = _valid_rows(system, candidates, residuals, tol, sep)
    rows = [candidates[i] for i in np.flatnonzero(ok)]
    if conjugates and rows:
        conj = np.conj(np.array(rows))
        conj_res = system.residual(conj)
        rows += [conj[i] for i in np.flatnonzero(_valid_rows(system, conj, conj_res, tol, sep))]
    solutions: list[BetheSolution] = []
    for r in rows:
        roots = _sort_roots(r, sep)
        sol = BetheSolution(
            family,
            tuple(complex(v) for v in roots),
            float(system.residual(roots[None, :])[0]),
            True,
            problem.pair_count,
        )
        for i, other in enumerate(solutions):
            if same_solution(sol, other, max(sep, 1e-6 * (1 + np.abs(roots).max()))):
                if sol.residual < other.residual:
                    solutions[i] = sol
                break
        else:
            solutions.append(sol)
    solutions.sort(key=lambda s: tuple((round(r.real, 9), round(r.imag, 9)) for r in s.roots))
    return solutions


def _occupation_configs(omegas: np.ndarray, n: int):
    ranges = [range(int(o) + 1) for o in omegas]
    return [cfg for cfg in itertools.product(*ranges) if sum(cfg) == n]


def _pole_seeds(system: _System, omegas, n: int, rng: np.random.Generator, spread: float):
    """Roots clustered around the poles, one cluster per occupation pattern."""
    seeds = []
    for cfg in _occupation_configs(omegas, n):
        roots = []
        for a, nu in zip(system.poles, cfg):
            roots.extend(a + spread * (rng.normal(size=nu) + 1j * rng.normal(size=nu)))
        seeds.append(roots)
    return np.array(seeds, dtype=complex).reshape(-1, n)


def _disk_seeds(system: _System, n: int, count: int, rng: np.random.Generator, radius: float):
    center = system.poles.mean()
    r = radius * np.sqrt(rng.uniform(size=(count, n)))
    phi = rng.uniform(0, 2 * np.pi, size=(count, n))
    return center + r * np.exp(1j * phi)


def _geometry(system: _System):
    poles = system.poles
    spread = np.ptp(poles) if len(poles) > 1 else 1.0
    radius = 2.0 * max(spread, 1.0) + np.abs(poles).max()
    gaps = np.diff(np.sort(poles))
    min_gap = gaps.min() if gaps.size else 1.0
    return radius, min_gap


def _polynomial_roots(system: _System) -> np.ndarray:
    """All roots of the single-unknown equation sum w_j/(a_j - x) + h = 0.

    Clearing denominators gives a polynomial whose roots come from the
    eigenvalues of its companion matrix.
    """
    poly = np.zeros(1, dtype=complex)
    factors = [np.array([a, -1.0], dtype=complex) for a in system.poles]
    for j, w in enumerate(system.weights):
        term = np.array([w], dtype=complex)
        for k, f in enumerate(factors):
            if k != j:
                term = npoly.polymul(term, f)
        poly = npoly.polyadd(poly, term)
    if system.field != 0:
        full = np.array([system.field], dtype=complex)
        for f in factors:
            full = npoly.polymul(full, f)
        poly = npoly.polyadd(poly, full)
    poly = npoly.polytrim(poly, tol=0)
    scale = np.abs(poly).max()
    poly = npoly.polytrim(poly / scale, tol=1e-14)
    if len(poly) < 2:
        return np.empty(0, dtype=complex)
    return npoly.polyroots(poly)


def _multistart(problem: BetheProblem, system: _System) -> np.ndarray:
    """Seeds for plain Newton: companion-matrix roots for one unknown,
    otherwise pole clusters plus uniform points in a disk."""
    n = problem.n_unknowns
    rng = np.random.default_rng(problem.seed)
    radius, min_gap = _geometry(system)
    if n == 1:
        return _polynomial_roots(system)[:, None]
    positive = system.weights > 0
    sub = _System(system.poles[positive], system.weights[positive], system.field)
    return np.vstack(
        [
            _pole_seeds(sub, system.weights[positive].astype(int), n, rng, 0.05 * min_gap),
            _disk_seeds(system, n, problem.seeds, rng, radius),
        ]
    )


def _warn_if_empty(solutions, problem):
    if not solutions:
        warnings.warn(
            f"no {problem.family.value} solution found for N={problem.pair_count}", BetheWarning, stacklevel=3
        )
    return solutions


def _solve_strong_limit(problem: BetheProblem) -> list[BetheSolution]:
    """Degenerate-case solver shared by both classes.

    Candidates come from (i) continuation of every weak-coupling cluster
    configuration out to infinite coupling, keeping paths whose roots stay
    finite, and (ii) multi-start Newton directly on the target equations.
    """
    system = _system(problem.scheme, problem.family)
    n = problem.n_unknowns
    radius, _ = _geometry(system)
    # Paths can jump branches near real-axis collisions; two detours on
    # opposite sides of the real axis recover what one of them loses.
    tracked = [_track_to_infinity(system, n, radius, detour) for detour in STRONG_DETOURS]
    seeds = np.vstack([*tracked, _multistart(problem, system)])
    if len(seeds) == 0:
        return []
    x, res = _newton(system, seeds, problem.max_iter, problem.tol_newton, problem.tol_sep, radius)
    return _collect(problem.family, system, x, res, problem)


def solve_degenerate_generic(problem: BetheProblem) -> list[BetheSolution]:
    """Root sets x_1..x_N of the generic-class equations (no root at 0)."""
    if problem.family is not Family.DEGENERATE_GENERIC:
        raise BetheError("problem family must be degenerate_generic")
    if 2 * problem.pair_count > problem.scheme.n_max:
        raise BetheError(
            f"generic class covers N <= N_max/2 = {problem.scheme.n_max / 2:g}, got N={problem.pair_count}"
        )
    return _warn_if_empty(_solve_strong_limit(problem), problem)


def solve_degenerate_zero(problem: BetheProblem) -> list[BetheSolution]:
    """Root sets z_1..z_{N-1} accompanying the fixed root x = 0."""
    if problem.family is not Family.DEGENERATE_ZERO:
        raise BetheError("problem family must be degenerate_zero")
    if problem.pair_count == 1:
        return [BetheSolution(problem.family, (), 0.0, True, 1)]
    return _warn_if_empty(_solve_strong_limit(problem), problem)


def laguerre_cluster(weight: float, nu: int) -> np.ndarray:
    """Weak-coupling offsets t of nu roots bound to one pole of given weight.

    With field h = -1/g and g -> 0, the roots are a + g t + O(g^2) where the
    t are the zeros of the generalized Laguerre polynomial L_nu^(-weight-1).
    """
    if nu == 0:
        return np.empty(0, dtype=complex)
    alpha = -weight - 1
    coeffs = np.array(
        [(-1.0) ** i * _gen_binom(nu + alpha, nu - i) / math.factorial(i) for i in range(nu + 1)]
    )
    return npoly.polyroots(coeffs).astype(complex)


def _gen_binom(a: float, k: int) -> float:
    """Binomial coefficient C(a, k) for real (possibly negative) a."""
    return math.prod(a - i for i in range(k)) / math.factorial(k)


def _cluster_configs(system: _System, n: int):
    """Ways to distribute n roots over the poles; a pole of weight w > 0
    holds at most w roots, a negative-weight pole any number."""
    caps = [int(w) if w > 0 else n for w in system.weights]
    return [cfg for cfg in itertools.product(*[range(c + 1) for c in caps]) if sum(cfg) == n]


def _weak_coupling_start(system: _System, cfg, g0: complex) -> list[complex]:
    return [
        system.poles[j] + g0 * t
        for j, nu in enumerate(cfg)
        for t in laguerre_cluster(system.weights[j], nu)
    ]


@dataclass
class PathReport:
    """Outcome of the coupling homotopy for one weak-coupling configuration."""

    config: tuple[int, ...]
    start: np.ndarray
    end: np.ndarray
    success: bool
    steps: int


def _root_separation(x: np.ndarray) -> np.ndarray:
    """Distance from each root to its nearest neighbour, shape (S, N)."""
    if x.shape[1] < 2:
        return np.full(x.shape, np.inf)
    d = np.abs(x[:, :, None] - x[:, None, :])
    d[:, np.arange(x.shape[1]), np.arange(x.shape[1])] = np.inf
    return d.min(axis=2)


def _continue(
    system: _System, n: int, coupling, max_steps: int = 20000, escape: float | None = None
) -> list[PathReport]:
    """Predictor-corrector continuation in tau from 0 to 1 of the equations
    with field -1/coupling(tau), one path per weak-coupling configuration.

    Steps adapt per path: grow by 1.5 on success, halve on failure.  A step
    fails when the corrector does not converge or moves the roots by more
    than a quarter of their separation from each other and from the poles.
    Paths with a root beyond ``escape`` are abandoned as diverging.
    """
    configs = _cluster_configs(system, n)
    g0 = coupling(0.0)
    starts = [_weak_coupling_start(system, cfg, g0) for cfg in configs]
    x = np.array(starts, dtype=complex).reshape(len(configs), n)
    p = len(x)
    if p == 0:
        return []

    def correct(xp, fields, iters=8):
        xc = xp.copy()
        for _ in range(iters):
            with np.errstate(all="ignore"):
                xc = _newton_step(system, xc, field=fields)
        with np.errstate(all="ignore"):
            res = system.residual(xc, fields)
        return xc, res

    x, _ = correct(x, np.full(p, -1.0 / g0))
    tau = np.zeros(p)
    dtau = np.full(p, 0.02)
    prev_x, prev_tau = x.copy(), np.full(p, np.nan)
    steps = np.zeros(p, dtype=int)
    failed = np.zeros(p, dtype=bool)
    active = np.ones(p, dtype=bool)
    while active.any():
        idx = np.flatnonzero(active)
        steps[idx] += 1
        t_new = np.minimum(tau[idx] + dtau[idx], 1.0)
        have_prev = np.isfinite(prev_tau[idx])
        span = np.where(have_prev, tau[idx] - prev_tau[idx], 1.0)
        ratio = np.where(have_prev, (t_new - tau[idx]) / span, 0.0)
        xp = x[idx] + ratio[:, None] * (x[idx] - prev_x[idx])
        fields = -1.0 / coupling(t_new)
        xc, res = correct(xp, fields)
        with np.errstate(all="ignore"):
            sep = np.minimum(system.pole_distance(xc), _root_separation(xc))
            ok = (np.abs(xc - xp) < 0.25 * sep).all(axis=1)
        ok &= np.isfinite(xc).all(axis=1) & (res < 1e-10)
        good, bad = idx[ok], idx[~ok]
        prev_x[good], prev_tau[good] = x[good], tau[good]
        x[good], tau[good] = xc[ok], t_new[ok]
        dtau[good] = np.minimum(dtau[good] * 1.5, 0.05)
        dtau[bad] *= 0.5
        failed[bad[dtau[bad] < 1e-9]] = True
        if escape is not None:
            failed[good[np.abs(x[good]).max(axis=1) > escape]] = True
        active = (tau < 1.0) & ~failed & (steps < max_steps)
    failed |= tau < 1.0
    return [
        PathReport(cfg, np.array(st, dtype=complex), x[i], not failed[i], int(steps[i]))
        for i, (cfg, st) in enumerate(zip(configs, starts))
    ]


def _log_path(g_from: float, g_to: float, detour: float):
    """g(tau) = g_from (g_to/g_from)^tau (1 + i detour sin(pi tau)).

    Real at both ends; the excursion off the real axis steers paths around
    the real couplings at which roots meet a pole or each other.
    """
    ratio = g_to / g_from

    def coupling(tau):
        return g_from * ratio**tau * (1.0 + 1j * detour * np.sin(np.pi * np.asarray(tau)))

    return coupling


def _start_coupling(system: _System) -> float:
    _, min_gap = _geometry(system)
    return 1e-5 * min_gap / max(1.0, np.abs(system.weights).max())


def _track_to_infinity(system: _System, n: int, radius: float, detour: float = 0.5) -> np.ndarray:
    """Endpoints of paths from weak coupling to g = 1e8 whose roots stay finite."""
    if n == 0:
        return np.empty((0, 0), dtype=complex)
    coupling = _log_path(_start_coupling(system), 1e8, detour)
    ends = [p.end for p in _continue(system, n, coupling, escape=1e3 * radius) if p.success]
    ends = np.array(ends, dtype=complex).reshape(-1, n)
    return ends[np.abs(ends).max(axis=1) < 1e2 * radius] if len(ends) else ends


def track_richardson(
    scheme: LevelScheme,
    n_pairs: int,
    g_target: float | None = None,
    *,
    detour: float = 0.5,
) -> list[PathReport]:
    """Continue every weak-coupling configuration from |G| ~ 0 to ``g_target``."""
    g_t = scheme.g if g_target is None else g_target
    if g_t <= 0:
        raise BetheError("Richardson continuation needs |G| > 0")
    system = _system(scheme, Family.RICHARDSON)
    gd = g_t * scheme.d
    g_from = min(gd, _start_coupling(system))
    return _continue(system, n_pairs, _log_path(g_from, gd, detour if g_from < gd else 0.0))


def solve_richardson(problem: BetheProblem) -> list[BetheSolution]:
    """Richardson root sets, primarily by homotopy in the coupling.

    Paths that fail are logged and skipped; random multi-start Newton at the
    target coupling adds any further solutions.
    """
    if problem.family is not Family.RICHARDSON:
        raise BetheError("problem family must be richardson")
    scheme, n = problem.scheme, problem.pair_count
    system = _system(scheme, Family.RICHARDSON)
    radius, _ = _geometry(system)
    radius = max(radius, 4.0 * scheme.g * scheme.d * scheme.n_max + 1.0)
    paths = track_richardson(scheme, n)
    n_failed = sum(not p.success for p in paths)
    if n_failed:
        log.warning("%d of %d Richardson continuation paths failed (N=%d)", n_failed, len(paths), n)
    tracked = np.array([p.end for p in paths if p.success], dtype=complex).reshape(-1, n)
    x, res = _newton(system, tracked, problem.max_iter, problem.tol_newton, problem.tol_sep, radius)
    found = _collect(problem.family, system, x, res, problem)
    if len(found) < len(paths):
        # Some configurations were lost or merged: fall back to random starts.
        rng = np.random.default_rng(problem.seed)
        seeds = np.vstack([tracked, _disk_seeds(system, n, problem.seeds, rng, radius)])
        x, res = _newton(system, seeds, problem.max_iter, problem.tol_newton, problem.tol_sep, radius)
        found = _collect(problem.family, system, x, res, problem)
    return _warn_if_empty(found, problem)


def solve(problem: BetheProblem) -> list[BetheSolution]:
    return {
        Family.RICHARDSON: solve_richardson,
        Family.DEGENERATE_GENERIC: solve_degenerate_generic,
        Family.DEGENERATE_ZERO: solve_degenerate_zero,
    }[problem.family](problem)
