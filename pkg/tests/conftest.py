import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from spectori.geometry import Family, validate_moduli_point  # noqa: E402


def random_real_point(rng: np.random.Generator, family: Family, n: int):
    """Real-form point with well separated branch values."""
    for _ in range(200):
        lam = []
        for _ in range(n):
            z = complex(rng.uniform(-1.5, 1.5), rng.uniform(0.2, 1.1))
            lam += [z, z.conjugate()]
        R = float(rng.uniform(2.3, 3.5)) if family is Family.ODD else None
        pts = [2, -2] + lam + ([R] if R else [])
        if min(abs(a - b) for i, a in enumerate(pts) for b in pts[i + 1:]) > 0.3:
            return validate_moduli_point(family, n, R, lam, real_form=True)
    raise RuntimeError("no admissible sample")


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def pytest_terminal_summary(terminalreporter):
    from acceptance_log import summary_lines
    lines = summary_lines()
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
