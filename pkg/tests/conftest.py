import numpy as np
import pytest

from vislit.attention import AttentionMap, ClickEvent, RasterConfig, SessionLog


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def random_map(rng, shape=(16, 16)):
    return AttentionMap(rng.random(shape))


def random_sum1(rng, shape=(16, 16)):
    v = rng.random(shape) + 1e-3
    return AttentionMap(v / v.sum())


def session_with_clicks(points, size=(200, 200), pid="p1", chart="V6",
                        answer=0, duration=60.0):
    w, h = size
    clicks = tuple(ClickEvent(x, y, 100 * (i + 1))
                   for i, (x, y) in enumerate(points))
    return SessionLog(participant_id=pid, chart_id=chart, clicks=clicks,
                      answer=answer, duration_s=duration, image_w=w, image_h=h)
