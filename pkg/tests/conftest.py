from pathlib import Path

import numpy as np
import pytest

from relfix.space import FiniteInstance, FiniteSpace, Relation, SelfMapTable

FIXTURES = Path(__file__).parent / "fixtures"

GEO5_COORDS = [0.0, 1.0, 1.5, 1.75, 1.875]


def line_instance(coords, image, relation=None, x0=0, epsilon=1.1, k=0.5):
    n = len(coords)
    relation = relation or Relation.total_index_order(n)
    space = FiniteSpace.from_coords(np.array(coords, dtype=float)[:, None])
    return FiniteInstance(space, relation, SelfMapTable(image), x0, epsilon, k)


def geo5(**kw):
    return line_instance(GEO5_COORDS, (1, 2, 3, 4, 4), **kw)


@pytest.fixture
def geo5_inst():
    return geo5()


# one line per acceptance criterion, echoed in the terminal summary
ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.write_sep("=", "acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
