import numpy as np
import pytest

from multilat import Scene


def make_scene(rng, mic_count=8, bounds=3.0, min_height_sv=0.15):
    """Random well-conditioned scene: non-coplanar mics, interior source.

    Rejection-samples until the smallest singular value of the centered
    microphone cloud is a reasonable fraction of the largest (guards
    against nearly coplanar draws) and places the source at a convex
    combination of the microphones.
    """
    while True:
        mics = rng.uniform(-bounds, bounds, size=(mic_count, 3))
        centered = mics - mics.mean(axis=0)
        sv = np.linalg.svd(centered, compute_uv=False)
        # three mics always span a plane; only reject collinear draws then
        floor = sv[2] if mic_count >= 4 else sv[1]
        if floor < min_height_sv * sv[0]:
            continue
        weights = rng.dirichlet(np.ones(mic_count))
        source = weights @ mics
        return Scene(mics=mics, source=source)


@pytest.fixture
def rng():
    return np.random.default_rng(20240917)
