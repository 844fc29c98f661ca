import numpy as np
import pytest
from hypothesis import settings

from cgnmt.model import ModelConfig, make_model_params
from cgnmt.rng import Xorshift64Star

settings.register_profile("deterministic", derandomize=True, deadline=None)
settings.load_profile("deterministic")


def fill_params(params, seed, scale=0.5):
    stream = Xorshift64Star(seed)
    for p in params.parameters():
        stream.fill_uniform(p.value, -scale, scale)
    return params


def random_model(config: ModelConfig, seed: int, scale: float = 0.5):
    return fill_params(make_model_params(config), seed, scale)


def random_vector(stream: Xorshift64Star, dim: int, lo=-1.0, hi=1.0) -> np.ndarray:
    return np.array([stream.uniform_range(lo, hi) for _ in range(dim)])


@pytest.fixture
def stream():
    return Xorshift64Star(20240817)
