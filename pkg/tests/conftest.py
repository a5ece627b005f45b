import random

import pytest

from compnovel.genetics import canonical_pairs
from compnovel.network import Network, make_network


@pytest.fixture
def four_line_minimal() -> Network:
    """The minimal 4-input network: 5 comparators in 3 layers."""
    return make_network(4, [(0, 1), (2, 3), (0, 2), (1, 3), (1, 2)])


def random_net(n: int, max_len: int, rng: random.Random) -> Network:
    pairs = canonical_pairs(n)
    length = rng.randint(0, max_len)
    return Network(n, tuple(rng.choice(pairs) for _ in range(length)))
