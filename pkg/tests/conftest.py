import os
import sys

import pytest

sys.path.insert(0, os.path.join(os.path.dirname(os.path.dirname(os.path.abspath(__file__))), 'src'))

from gensets.korobov_core import KorobovParams, SigmaSequence  # noqa: E402
from gensets.logging_system import set_quiet  # noqa: E402

set_quiet(True)


@pytest.fixture
def sobolev_1d():
    """Korobov d=1, alpha=2, unit weights."""
    return SigmaSequence.korobov(KorobovParams.unweighted(1, 2.0))


@pytest.fixture
def korobov_2d():
    return SigmaSequence.korobov(KorobovParams.product(2, 2.0, [1.0, 0.5]))


@pytest.fixture
def korobov_2d_half():
    """Korobov d=2, alpha=2, product weights gamma_j = 0.5."""
    return SigmaSequence.korobov(KorobovParams.product(2, 2.0, [0.5, 0.5]))
