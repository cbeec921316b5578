import pytest

from src.models import SamplerConfig, Tolerances
from src.services.aggregators import parse_spec, resolve_arity


@pytest.fixture
def cfg() -> SamplerConfig:
    """Small budget, small chunks: enough for corner witnesses and a few sampled ones."""
    return SamplerConfig(seed=42, budget=4000, chunk_size=1024)


@pytest.fixture
def tol() -> Tolerances:
    return Tolerances()


@pytest.fixture
def spec():
    def build(text: str, arity=None):
        return resolve_arity(parse_spec(text), arity)

    return build
