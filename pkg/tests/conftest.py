import numpy as np
import pytest

from retime.frames import FrameSequence


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def random_sequence(rng, n=None, h=4, w=5, c=3, seq_id="seq"):
    if n is None:
        n = int(rng.integers(1, 30))
    frames = rng.uniform(0.0, 255.0, size=(n, h, w, c))
    return FrameSequence(seq_id, frames)
