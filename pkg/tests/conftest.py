import sys
from pathlib import Path

import pytest
from hypothesis import settings
from hypothesis import strategies as st

sys.path.insert(0, str(Path(__file__).parent))

from mci.graph import Dag  # noqa: E402

# exhaustive oracles make single examples slow; timing is not what is under test
settings.register_profile("mci", deadline=None)
settings.load_profile("mci")


@st.composite
def dags(draw, min_n=1, max_n=7):
    n = draw(st.integers(min_n, max_n))
    order = draw(st.permutations(range(n)))
    pairs = [(order[i], order[j]) for i in range(n) for j in range(i + 1, n)]
    mask = draw(st.lists(st.booleans(), min_size=len(pairs), max_size=len(pairs)))
    return Dag.from_edges(n, [p for p, keep in zip(pairs, mask) if keep])


@pytest.fixture
def path3():
    return Dag.from_edges(3, [(0, 1), (1, 2)])


@pytest.fixture
def two_edges():
    return Dag.from_edges(4, [(0, 1), (2, 3)])


@pytest.fixture
def star3():
    """Sources 0, 1, 2 all pointing at sink 3."""
    return Dag.from_edges(4, [(0, 3), (1, 3), (2, 3)])
