"""Scheme factories shared by the test modules."""

from __future__ import annotations

import numpy as np

from gaudin_pair.hilbert import Level, LevelScheme


def two_level_degenerate(g: float = 1.0) -> LevelScheme:
    """Omega = (1, 1) with c^2 = (0.2, 0.8)."""
    return LevelScheme((Level(1, 0.0, np.sqrt(0.2)), Level(1, 0.0, np.sqrt(0.8))), g, "degenerate")


def two_level_reduced(g: float = 0.1) -> LevelScheme:
    """Omega = (1, 1) with eps = (0, 1)."""
    return LevelScheme((Level(1, 0.0), Level(1, 1.0)), g, "reduced")


def _spread(rng: np.random.Generator, n: int, lo: float, hi: float, gap: float) -> np.ndarray:
    while True:
        v = np.sort(rng.uniform(lo, hi, n))
        if n == 1 or np.diff(v).min() > gap:
            return rng.permutation(v)


def random_scheme(rng: np.random.Generator, mode: str, n: int | None = None) -> LevelScheme:
    """n in {2, 3, 4}, Omega_j in {1, 2, 3}, well-separated c_j^2 or eps_j."""
    n = int(rng.integers(2, 5)) if n is None else n
    omegas = rng.integers(1, 4, n)
    g = float(rng.uniform(0.2, 1.5))
    if mode == "degenerate":
        c2 = _spread(rng, n, 0.05, 1.0, 0.05)
        levels = [Level(int(o), 0.0, float(np.sqrt(c))) for o, c in zip(omegas, c2)]
    else:
        eps = _spread(rng, n, 0.0, 2.0, 0.1)
        levels = [Level(int(o), float(e)) for o, e in zip(omegas, eps)]
    return LevelScheme(tuple(levels), g, mode)


def randomized_suite(seed: int = 2024, count: int = 25) -> list[LevelScheme]:
    """Alternating degenerate / reduced random schemes."""
    rng = np.random.default_rng(seed)
    return [random_scheme(rng, "degenerate" if i % 2 == 0 else "reduced") for i in range(count)]
