import pytest

from atsgames import bundled, parse_game
from atsgames.traces import DistributedAlphabet


@pytest.fixture
def fig1():
    return parse_game(bundled("fig1.game"))


@pytest.fixture
def qr():
    """a on q, b on r: two independent letters."""
    return DistributedAlphabet.from_locations({"a": ["q"], "b": ["r"]}, ["q", "r"])


@pytest.fixture
def chain():
    """a and b share the single process q."""
    return DistributedAlphabet.from_locations({"a": ["q"], "b": ["q"]}, ["q"])
