import random

import pytest

from hassim.core import RadioTrace, TraceCategory, default_ladder, make_ladder


@pytest.fixture
def ladder():
    return default_ladder()


@pytest.fixture
def small_ladder():
    return make_ladder([1000, 2000, 4000], 2.0)


def make_trace(samples, trace_id="t", category=TraceCategory.STATIC):
    return RadioTrace(id=trace_id, category=category, samples=tuple(float(s) for s in samples))


def random_trace(seed, length=40, low=200, high=10000, trace_id=None):
    rng = random.Random(seed)
    return make_trace(
        [rng.uniform(low, high) for _ in range(length)],
        trace_id=trace_id or f"rnd{seed}",
        category=TraceCategory.CAR,
    )


def fading_trace(high_kbps=4000, fade_kbps=50, high_s=20, fade_s=8, periods=4, trace_id="fade"):
    """Periodic deep throughput fades: high_s seconds up, fade_s seconds down."""
    samples = []
    for _ in range(periods):
        samples.extend([high_kbps] * high_s)
        samples.extend([fade_kbps] * fade_s)
    return make_trace(samples, trace_id=trace_id, category=TraceCategory.TRAIN)
