"""Seeded random formulas and sequents.

Sample ``i`` under seed ``s`` depends only on ``(s, i)``, so a sweep can be
split across workers without changing a single draw.
"""

from __future__ import annotations

import random
from typing import List, Sequence, Tuple

from .formula import Box, Formula, Impl, Neg, Var

Sequent = Tuple[Tuple[Formula, ...], Formula]


def random_formula(rng: random.Random, letters: Sequence[str] = ("p", "q", "r"), depth: int = 3) -> Formula:
    if depth == 0 or rng.random() < 0.25:
        return Var(rng.choice(letters))
    op = rng.randrange(3)
    if op == 0:
        return Neg(random_formula(rng, letters, depth - 1))
    if op == 1:
        return Box(random_formula(rng, letters, depth - 1))
    return Impl(random_formula(rng, letters, depth - 1), random_formula(rng, letters, depth - 1))


def sample_rng(seed: int, index: int) -> random.Random:
    return random.Random(f"{seed}:{index}")


def random_sequent(seed: int, index: int, max_vars: int = 3, max_depth: int = 3, max_premises: int = 2) -> Sequent:
    rng = sample_rng(seed, index)
    letters = ("p", "q", "r", "s", "u")[:max_vars]
    n_prem = rng.randint(0, max_premises)
    premises = tuple(random_formula(rng, letters, rng.randint(0, max_depth)) for _ in range(n_prem))
    return premises, random_formula(rng, letters, rng.randint(1, max_depth))


def sequents(seed: int, count: int, start: int = 0) -> List[Sequent]:
    return [random_sequent(seed, i) for i in range(start, start + count)]
