import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from tempora.graph import TemporalGraph, parse_edge_list

G1_TEXT = "a b 1\nb c 2\nb c 5\nc d 6\n"


@pytest.fixture
def g1() -> TemporalGraph:
    """Four temporal edges on a,b,c,d; the recurring hand-checked fixture."""
    return parse_edge_list(G1_TEXT)


@pytest.fixture
def star4() -> TemporalGraph:
    """Leaf -> center -> leaf chains, all feasible at delta=1."""
    return parse_edge_list("u1 c 1\nc u2 2\nu2 c 3\nc u3 4\nu3 c 5\nc u1 6\n")
