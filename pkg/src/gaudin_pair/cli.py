"""Command-line front end: load a scheme from TOML and run one workflow.

Config layout::

    g = 1.0
    mode = "degenerate"        # general | reduced | degenerate
    seed = 0                   # optional, default 0

    [[level]]
    omega = 1
    epsilon = 0.0
    c = 0.447214

    [[level]]
    omega = 1
    c = 0.894427

Optional top-level keys: command, pairs ("2" or "1..3"), format, out,
tol_newton, tol_sep, n_seeds.  Optional ``[[solution]]`` stanzas
(sector, class, roots = [[re, im], ...]) inject root sets that the
``compare`` command checks alongside the solver output.

Exit status: 0 success, 1 verification failure, 2 every solver seed
failed, 3 invalid configuration.
"""

from __future__ import annotations

import argparse
import csv
import enum
import io
import logging
import os
import re
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Callable, Sequence, TextIO

import tomli

from .bethe import BetheError, BetheProblem, Family, bae_residual, solve
from .hilbert import Level, LevelScheme, Mode, SchemeError
from .operators import sector_operator_set
from .oracle import (
    OracleSpectrum,
    VerificationError,
    commutator_audit,
    exact_diagonalize_sector,
    state_residuals,
)
from .spectrum import (
    EigenRecord,
    InvalidStateError,
    OracleComparison,
    RecordClass,
    compare_with_oracle,
    invariant_eigenvalues,
    energy_from_invariants,
    make_record,
    sector_records,
)

log = logging.getLogger(__name__)

EXIT_OK, EXIT_VERIFY, EXIT_SOLVER, EXIT_CONFIG = 0, 1, 2, 3
THREADS_ENV = "GAUDIN_PAIR_THREADS"
RESIDUAL_GATE = 1e-8


class Command(str, enum.Enum):
    VERIFY = "verify"
    SOLVE = "solve"
    SPECTRUM = "spectrum"
    ORACLE = "oracle"
    COMPARE = "compare"


class ConfigError(ValueError):
    """Invalid configuration.  ``invariant`` names the violated rule."""

    def __init__(self, message: str, invariant: str, level: int | None = None):
        super().__init__(message)
        self.invariant = invariant
        self.level = level

    def diagnostic(self) -> str:
        where = f" (level {self.level + 1})" if self.level is not None else ""
        return f"invalid config{where}: {self} [invariant: {self.invariant}]"


@dataclass(frozen=True)
class InjectedSolution:
    sector: int
    cls: RecordClass
    roots: tuple[complex, ...]


@dataclass(frozen=True)
class RunConfig:
    scheme: LevelScheme
    command: Command = Command.SPECTRUM
    pairs: tuple[int, ...] | None = None
    out: Path | None = None
    format: str = "csv"
    seed: int = 0
    tol_newton: float = 1e-11
    tol_sep: float = 1e-8
    n_seeds: int | None = None
    injected: tuple[InjectedSolution, ...] = field(default=())

    @property
    def sectors(self) -> tuple[int, ...]:
        return self.pairs if self.pairs is not None else tuple(range(self.scheme.n_max + 1))

    def solver_options(self) -> dict:
        return {"seed": self.seed, "tol_newton": self.tol_newton, "tol_sep": self.tol_sep, "n_seeds": self.n_seeds}


# Parsing

_PAIRS = re.compile(r"^\s*(\d+)\s*(?:\.\.\s*(\d+)\s*)?$")
_LEVEL_KEYS = {"omega", "epsilon", "c"}
_TOP_KEYS = {"g", "mode", "seed", "command", "pairs", "format", "out", "tol_newton", "tol_sep", "n_seeds", "level", "solution"}


def parse_pairs(text: str | int) -> tuple[int, ...]:
    """``"3"`` -> (3,), ``"1..3"`` -> (1, 2, 3)."""
    if isinstance(text, int):
        text = str(text)
    m = _PAIRS.match(text)
    if not m:
        raise ConfigError(f"pairs must look like N or N..M, got {text!r}", "pairs format")
    lo = int(m.group(1))
    hi = int(m.group(2)) if m.group(2) is not None else lo
    if hi < lo:
        raise ConfigError(f"empty pair range {text!r}", "pairs format")
    return tuple(range(lo, hi + 1))


def _number(table: dict, key: str, kind, default=None, level: int | None = None):
    if key not in table:
        if default is None:
            raise ConfigError(f"missing required key '{key}'", f"{key} present", level)
        return default
    value = table[key]
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"'{key}' must be a number, got {value!r}", f"{key} numeric", level)
    if kind is int and float(value) != int(value):
        raise ConfigError(f"'{key}' must be an integer, got {value!r}", f"{key} integer", level)
    return kind(value)


def _levels(doc: dict) -> list[Level]:
    stanzas = doc.get("level")
    if not isinstance(stanzas, list) or not stanzas:
        raise ConfigError("config needs at least one [[level]] stanza", "at least one level")
    levels = []
    for i, st in enumerate(stanzas):
        unknown = set(st) - _LEVEL_KEYS
        if unknown:
            raise ConfigError(f"unknown level keys {sorted(unknown)}", "known level keys", i)
        levels.append(
            Level(_number(st, "omega", int, level=i), _number(st, "epsilon", float, 0.0, i), _number(st, "c", float, 1.0, i))
        )
    return levels


def _injected(doc: dict) -> tuple[InjectedSolution, ...]:
    out = []
    for st in doc.get("solution", []):
        try:
            roots = tuple(complex(float(r[0]), float(r[1])) for r in st.get("roots", []))
            out.append(InjectedSolution(int(st["sector"]), RecordClass(st["class"]), roots))
        except (KeyError, ValueError, TypeError, IndexError) as exc:
            raise ConfigError(f"bad [[solution]] stanza: {exc}", "solution stanza format") from exc
    return tuple(out)


def parse_config(source: str | os.PathLike) -> RunConfig:
    """Load and validate a run configuration.

    ``source`` is a path (``os.PathLike``, or a string naming an existing
    file) or inline TOML text.  Level amplitudes are normalized to sum c^2 = 1.
    """
    if isinstance(source, os.PathLike) or ("\n" not in source and Path(source).is_file()):
        try:
            text = Path(source).read_text()
        except OSError as exc:
            raise ConfigError(f"cannot read config: {exc}", "readable file") from exc
    else:
        text = source
    try:
        doc = tomli.loads(text)
    except tomli.TOMLDecodeError as exc:
        raise ConfigError(f"syntax error: {exc}", "valid TOML syntax") from exc

    unknown = set(doc) - _TOP_KEYS
    if unknown:
        raise ConfigError(f"unknown keys {sorted(unknown)}", "known top-level keys")
    try:
        mode = Mode(doc.get("mode", "general"))
    except ValueError:
        raise ConfigError(f"mode must be one of {[m.value for m in Mode]}, got {doc['mode']!r}", "mode value") from None
    try:
        scheme = LevelScheme(tuple(_levels(doc)), _number(doc, "g", float, 1.0), mode)
    except SchemeError as exc:
        raise ConfigError(str(exc), exc.invariant, exc.level) from exc

    try:
        command = Command(doc.get("command", "spectrum"))
    except ValueError:
        raise ConfigError(f"unknown command {doc['command']!r}", "command value") from None
    out_format = doc.get("format", "csv")
    if out_format not in ("csv", "table"):
        raise ConfigError(f"format must be csv or table, got {out_format!r}", "format value")
    seed = _number(doc, "seed", int, 0)
    n_seeds = doc.get("n_seeds")
    config = RunConfig(
        scheme=scheme,
        command=command,
        pairs=parse_pairs(doc["pairs"]) if "pairs" in doc else None,
        out=Path(doc["out"]) if "out" in doc else None,
        format=out_format,
        seed=seed,
        tol_newton=_number(doc, "tol_newton", float, 1e-11),
        tol_sep=_number(doc, "tol_sep", float, 1e-8),
        n_seeds=None if n_seeds is None else _number(doc, "n_seeds", int),
        injected=_injected(doc),
    )
    return validate(config)


def validate(config: RunConfig) -> RunConfig:
    n_max = config.scheme.n_max
    for n in config.sectors:
        if not 0 <= n <= n_max:
            raise ConfigError(f"pair count {n} outside [0, {n_max}]", "0 <= pairs <= N_max")
    if config.tol_newton <= 0 or config.tol_sep <= 0:
        raise ConfigError("solver tolerances must be positive", "positive tolerances")
    if config.seed < 0:
        raise ConfigError("seed must be non-negative", "seed >= 0")
    if config.n_seeds is not None and config.n_seeds < 1:
        raise ConfigError("n_seeds must be at least 1", "n_seeds >= 1")
    if config.command in (Command.SOLVE, Command.SPECTRUM, Command.COMPARE) and config.scheme.mode is Mode.GENERAL:
        raise ConfigError(
            f"'{config.command.value}' needs an integrable scheme", "mode in {reduced, degenerate}"
        )
    for sol in config.injected:
        if not 0 <= sol.sector <= n_max:
            raise ConfigError(f"injected solution sector {sol.sector} out of range", "0 <= sector <= N_max")
    return config


# Output

def fmt(x: float) -> str:
    """17 significant digits, so values round-trip exactly; -0 prints as 0."""
    return f"{float(x) + 0.0:.17g}"


@dataclass
class Row:
    sector: int
    cls: str
    roots: tuple[complex, ...]
    energy: float
    residual: float
    values: tuple[float, ...]


def csv_header(n_levels: int) -> list[str]:
    return ["sector", "class", "root_index", "root_re", "root_im", "energy", "residual"] + [
        f"e_{j + 1}" for j in range(n_levels)
    ]


def write_rows(rows: Sequence[Row], n_levels: int, stream: TextIO):
    """One CSV line per root; rootless records get one line with blank root fields."""
    w = csv.writer(stream, lineterminator="\n")
    w.writerow(csv_header(n_levels))
    for row in rows:
        tail = [fmt(row.energy), fmt(row.residual), *(fmt(v) for v in row.values)]
        if not row.roots:
            w.writerow([row.sector, row.cls, "", "", "", *tail])
        for k, r in enumerate(row.roots):
            w.writerow([row.sector, row.cls, k, fmt(r.real), fmt(r.imag), *tail])


def read_rows(text: str) -> list[Row]:
    """Inverse of :func:`write_rows`."""
    reader = csv.reader(io.StringIO(text))
    header = next(reader)
    n_levels = len(header) - 7
    rows: list[Row] = []
    for rec in reader:
        sector, cls, idx, re_, im_, energy, residual, *values = rec
        vals = tuple(float(v) for v in values[:n_levels])
        if idx in ("", "0"):
            rows.append(Row(int(sector), cls, (), float(energy), float(residual), vals))
        if idx != "":
            rows[-1].roots = rows[-1].roots + (complex(float(re_), float(im_)),)
    return rows


def _table(rows: Sequence[Row], n_levels: int) -> str:
    head = ["N", "class", "roots", "energy", "residual"] + [f"e_{j + 1}" for j in range(n_levels)]
    body = []
    for r in rows:
        roots = " ".join(f"{z.real:.6g}{z.imag:+.6g}j" for z in r.roots) or "-"
        body.append([str(r.sector), r.cls, roots, f"{r.energy:.10g}", f"{r.residual:.2e}", *(f"{v:.10g}" for v in r.values)])
    widths = [max(len(x) for x in col) for col in zip(head, *body)]
    lines = ["  ".join(h.ljust(w) for h, w in zip(line, widths)).rstrip() for line in [head, *body]]
    return "\n".join(lines) + "\n"


# Workflows

def worker_count() -> int:
    raw = os.environ.get(THREADS_ENV)
    cpus = os.cpu_count() or 1
    if raw is None:
        return cpus
    try:
        return max(1, min(int(raw), cpus))
    except ValueError:
        log.warning("ignoring non-integer %s=%r", THREADS_ENV, raw)
        return cpus


def _parallel_map(fn: Callable, items: Sequence) -> list:
    """Ordered map over at most ``GAUDIN_PAIR_THREADS`` worker threads."""
    workers = min(worker_count(), max(1, len(items)))
    if workers == 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


@dataclass
class Outcome:
    status: int
    rows: list[Row] = field(default_factory=list)
    text: str = ""
    messages: list[str] = field(default_factory=list)


def _record_row(rec: EigenRecord) -> Row:
    return Row(rec.sector, rec.cls.value, rec.roots, rec.energy, rec.max_residual, rec.invariant_eigenvalues)


def _sector_problems(scheme: LevelScheme, n: int) -> list[tuple[RecordClass, Family, int]]:
    """(record class, equation family, pair count of the equations) used for sector n."""
    if n == 0:
        return []
    if scheme.mode is Mode.REDUCED:
        return [(RecordClass.RICHARDSON, Family.RICHARDSON, n)]
    if 2 * n <= scheme.n_max:
        return [(RecordClass.GENERIC, Family.DEGENERATE_GENERIC, n), (RecordClass.TALMI_ZERO, Family.DEGENERATE_ZERO, n)]
    particle = scheme.n_max - n + 1
    return [(RecordClass.FULL if particle == 1 else RecordClass.HOLE_ZERO, Family.DEGENERATE_ZERO, particle)]


def _run_verify(config: RunConfig) -> Outcome:
    scheme = config.scheme
    report = commutator_audit(sector_operator_set(scheme, None), strict=False)
    status = EXIT_OK if report.passed else EXIT_VERIFY
    lines = ["check,value,tolerance,required,status"]
    for name, value, tol, required in report.entries:
        ok = (value < tol) or not required
        lines.append(f'"{name}",{fmt(value)},{fmt(tol)},{int(required)},{"pass" if ok else "FAIL"}')
    messages = [f"audit failed: {n} = {v:.3g} (tol {t:g})" for n, v, t in report.failures]
    return Outcome(status, text="\n".join(lines) + "\n", messages=messages)


def _run_solve(config: RunConfig) -> Outcome:
    scheme = config.scheme
    opts = config.solver_options()

    def one(n: int) -> tuple[list[Row], bool]:
        rows, failed = [], False
        if n == 0:
            rec = make_record(scheme, RecordClass.EMPTY, (), 0)
            return [_record_row(rec)], False
        for cls, family, count in _sector_problems(scheme, n):
            sols = solve(BetheProblem(scheme, family, count, **opts))
            failed |= not sols
            for sol in sols:
                vals = invariant_eigenvalues(scheme, cls, sol.roots, count)
                energy = energy_from_invariants(scheme, vals, sol.roots if cls is RecordClass.RICHARDSON else None)
                rows.append(Row(n, cls.value, sol.roots, energy, sol.residual, tuple(float(v) for v in vals)))
        return rows, failed

    results = _parallel_map(one, config.sectors)
    rows = [r for chunk, _ in results for r in chunk]
    empty = [n for n, (_, failed) in zip(config.sectors, results) if failed]
    messages = [f"no converged solution in sector {n}" for n in empty]
    return Outcome(EXIT_SOLVER if empty else EXIT_OK, rows, messages=messages)


def _oracle_for(scheme: LevelScheme, n: int) -> OracleSpectrum:
    return exact_diagonalize_sector(sector_operator_set(scheme, n), n)


def _bethe_sectors(config: RunConfig) -> tuple[list[list[EigenRecord]], list[OracleComparison]]:
    scheme, opts = config.scheme, config.solver_options()

    def one(n: int):
        recs = sector_records(scheme, n, **opts)
        return recs, compare_with_oracle(recs, _oracle_for(scheme, n))

    results = _parallel_map(one, config.sectors)
    return [r for r, _ in results], [c for _, c in results]


def _check_records(records: Sequence[EigenRecord], comparisons: Sequence[OracleComparison]) -> list[str]:
    problems = []
    for rec in records:
        if rec.max_residual > RESIDUAL_GATE:
            problems.append(f"sector {rec.sector} {rec.cls.value}: eigen-residual {rec.max_residual:.3g}")
    for comp in comparisons:
        for sector, energy in comp.unmatched_bethe:
            problems.append(f"sector {sector}: Bethe energy {energy:.12g} not in oracle spectrum")
    return problems


def _run_spectrum(config: RunConfig) -> Outcome:
    per_sector, comparisons = _bethe_sectors(config)
    records = sorted((r for recs in per_sector for r in recs), key=lambda r: (r.sector, r.energy, r.cls.value))
    problems = _check_records(records, comparisons)
    unsolved = [n for n, recs in zip(config.sectors, per_sector) if not recs]
    messages = problems + [f"no Bethe record in sector {n}" for n in unsolved]
    for n, comp in zip(config.sectors, comparisons):
        messages.append(f"sector {n}: coverage {comp.covered}/{comp.oracle_dim}")
    status = EXIT_VERIFY if problems else EXIT_SOLVER if unsolved else EXIT_OK
    return Outcome(status, [_record_row(r) for r in records], messages=messages)


def _run_oracle(config: RunConfig) -> Outcome:
    scheme = config.scheme

    def one(n: int) -> list[Row]:
        ops = sector_operator_set(scheme, n)
        exact = exact_diagonalize_sector(ops, n)
        res = state_residuals(exact, ops) if ops.invariants else [0.0] * exact.dim
        return [Row(n, "oracle", (), e, r, tuple(v)) for e, r, v in zip(exact.energies, res, exact.invariant_values)]

    rows = [r for chunk in _parallel_map(one, config.sectors) for r in chunk]
    return Outcome(EXIT_OK, rows)


def _injected_records(config: RunConfig) -> tuple[list[EigenRecord], list[str]]:
    """Records for injected root sets; root sets failing the residual gate are reported."""
    scheme = config.scheme
    records, problems = [], []
    families = {
        RecordClass.RICHARDSON: Family.RICHARDSON,
        RecordClass.GENERIC: Family.DEGENERATE_GENERIC,
        RecordClass.TALMI_ZERO: Family.DEGENERATE_ZERO,
        RecordClass.HOLE_ZERO: Family.DEGENERATE_ZERO,
    }
    for sol in config.injected:
        label = f"injected {sol.cls.value} in sector {sol.sector}"
        try:
            family = families.get(sol.cls)
            res = bae_residual(scheme, family, sol.roots, config.tol_sep) if family and sol.roots else 0.0
            if res > max(config.tol_newton, RESIDUAL_GATE):
                problems.append(f"{label}: Bethe-equation residual {res:.3g}")
                continue
            rec = make_record(scheme, sol.cls, sol.roots, sol.sector, res)
        except (BetheError, InvalidStateError, ArithmeticError, SchemeError) as exc:
            problems.append(f"{label}: {exc}")
            continue
        if rec.sector != sol.sector:
            problems.append(f"{label}: state lives in sector {rec.sector}")
            continue
        records.append(rec)
    return records, problems


def _run_compare(config: RunConfig) -> Outcome:
    per_sector, comparisons = _bethe_sectors(config)
    injected, problems = _injected_records(config)
    for rec in injected:
        comp = compare_with_oracle([rec], _oracle_for(config.scheme, rec.sector))
        problems += [f"injected record in sector {s}: energy {e:.12g} not in oracle spectrum" for s, e in comp.unmatched_bethe]
    problems += _check_records([r for recs in per_sector for r in recs] + injected, comparisons)
    lines = ["sector,oracle_dim,bethe_records,matched,covered,coverage"]
    for n, recs, comp in zip(config.sectors, per_sector, comparisons):
        lines.append(f"{n},{comp.oracle_dim},{len(recs)},{comp.matched},{comp.covered},{fmt(comp.coverage)}")
    return Outcome(EXIT_VERIFY if problems else EXIT_OK, text="\n".join(lines) + "\n", messages=problems)


_WORKFLOWS = {
    Command.VERIFY: _run_verify,
    Command.SOLVE: _run_solve,
    Command.SPECTRUM: _run_spectrum,
    Command.ORACLE: _run_oracle,
    Command.COMPARE: _run_compare,
}


def run(config: RunConfig, stream: TextIO | None = None) -> int:
    """Execute the configured workflow, write its report and return the exit status."""
    try:
        outcome = _WORKFLOWS[config.command](config)
    except VerificationError as exc:
        print(str(exc), file=sys.stderr)
        return EXIT_VERIFY
    except SchemeError as exc:
        print(f"invalid config: {exc} [invariant: {exc.invariant}]", file=sys.stderr)
        return EXIT_CONFIG
    if outcome.rows or not outcome.text:
        buf = io.StringIO()
        if config.format == "table":
            buf.write(_table(outcome.rows, config.scheme.n))
        else:
            write_rows(outcome.rows, config.scheme.n, buf)
        body = buf.getvalue()
    else:
        body = outcome.text
    if config.out is not None:
        config.out.write_text(body)
    else:
        (stream or sys.stdout).write(body)
    for msg in outcome.messages:
        print(msg, file=sys.stderr)
    return outcome.status


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="gaudin-pair", description="Quasispin pairing workbench")
    p.add_argument("--config", required=True, type=Path, help="TOML scheme configuration")
    p.add_argument("--command", choices=[c.value for c in Command])
    p.add_argument("--pairs", help="sector N or range N..M")
    p.add_argument("--out", type=Path)
    p.add_argument("--format", choices=["csv", "table"])
    p.add_argument("--seed", type=int)
    p.add_argument("--tol-newton", type=float)
    p.add_argument("--tol-sep", type=float)
    p.add_argument("-v", "--verbose", action="store_true")
    return p


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    try:
        config = parse_config(args.config)
        overrides = {
            "command": Command(args.command) if args.command else None,
            "pairs": parse_pairs(args.pairs) if args.pairs else None,
            "out": args.out,
            "format": args.format,
            "seed": args.seed,
            "tol_newton": args.tol_newton,
            "tol_sep": args.tol_sep,
        }
        config = validate(replace(config, **{k: v for k, v in overrides.items() if v is not None}))
    except ConfigError as exc:
        print(exc.diagnostic(), file=sys.stderr)
        return EXIT_CONFIG
    return run(config)


if __name__ == "__main__":
    sys.exit(main())
