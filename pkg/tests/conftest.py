import numpy as np
import pytest

from coldstart_al.core import Event, FeatureVector
from coldstart_al.models._kernels import warmup


@pytest.fixture(scope="session", autouse=True)
def _warm_kernels():
    # pay the numba compile cost once, outside any timed assertions
    warmup()


def make_event(i, ts=None, label=0, entity="e0", amount=10.0, cats=("a",), nums=(1.0,)):
    return Event(
        event_id=f"ev{i}",
        timestamp=i if ts is None else ts,
        entity_id=entity,
        amount=amount,
        categoricals=tuple(cats),
        numericals=tuple(nums),
        _true_label=label,
    )


def make_fv(event, values):
    return FeatureVector(values=np.asarray(values, dtype=np.float64), event_id=event.event_id)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
