from __future__ import annotations

import random
from fractions import Fraction

import pytest

from seqspace.families import SequenceFamily, SpaceParams


def random_nonzero(rng: random.Random, lo: int = -5, hi: int = 5) -> Fraction:
    while True:
        v = rng.randint(lo, hi)
        if v:
            return Fraction(v, rng.randint(1, 3))


def random_params(rng: random.Random, N: int, m_max: int = 3, p=2) -> SpaceParams:
    """Random valid (r, s, t, m) on [0, N]: r, t never zero, s_0 in {+-1, +-2}."""
    r = SequenceFamily.explicit([random_nonzero(rng) for _ in range(N + 1)])
    t = SequenceFamily.explicit([random_nonzero(rng) for _ in range(N + 1)])
    s = [Fraction(rng.choice((-2, -1, 1, 2)))] + [Fraction(rng.randint(-2, 2)) for _ in range(N)]
    return SpaceParams(r, SequenceFamily.explicit(s), t, rng.randint(1, m_max), p, label="random")


def random_vector(rng: random.Random, N: int, lo: int = -9, hi: int = 9) -> list[Fraction]:
    return [Fraction(rng.randint(lo, hi), rng.randint(1, 4)) for _ in range(N + 1)]


@pytest.fixture
def rng() -> random.Random:
    return random.Random(20240517)


ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split("[")[1].split("]")[0])):
            terminalreporter.write_line(line)
