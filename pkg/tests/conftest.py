import sys
from fractions import Fraction
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from paperfold import builtin_example, truncate
from paperfold.scar import ScarPair


@pytest.fixture(scope="session")
def seq_scheme():
    return builtin_example("seq")


@pytest.fixture(scope="session")
def cantor_scheme():
    return builtin_example("cantor")


@pytest.fixture(scope="session")
def seq_pair_256(seq_scheme):
    return ScarPair(truncate(seq_scheme, Fraction(1, 256)))


@pytest.fixture(scope="session")
def cantor_pair_256(cantor_scheme):
    return ScarPair(truncate(cantor_scheme, Fraction(1, 256)))


@pytest.fixture(scope="session")
def cantor_pair_mid(cantor_scheme):
    from paperfold.scheme import truncate_max_gap
    return ScarPair(truncate_max_gap(cantor_scheme, Fraction(1, 3) ** 9))
