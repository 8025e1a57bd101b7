import numpy as np
import pytest

from corrmmse.channel import (
    CompositeFading,
    RainFading,
    realize_channel,
    synth_beam_pattern,
)
from corrmmse.numerics import RngStream

# Fig.-2-style parameters used throughout the suite
FIG2_KR_DB = 10.0
FIG2_MU = -2.63
FIG2_SIGMA = 0.5


@pytest.fixture(scope="session")
def gain7():
    return synth_beam_pattern(7, 0.3)


@pytest.fixture(scope="session")
def composite_model():
    return CompositeFading(FIG2_KR_DB, FIG2_MU, FIG2_SIGMA)


@pytest.fixture(scope="session")
def rain_model():
    return RainFading(FIG2_MU, FIG2_SIGMA, db_conversion=False)


@pytest.fixture(scope="session")
def composite_instances(gain7, composite_model):
    """200 deterministic composite channel instances (seed 1234)."""
    return [
        realize_channel(gain7, composite_model, RngStream(1234, t)) for t in range(200)
    ]


@pytest.fixture
def rng():
    return np.random.default_rng(0)
