import numpy as np
import pytest

from evdecode import _backend
from evdecode.model import Instance

BACKENDS = _backend.available()


def tiny_instance(seed, n=None, m=None, *, battery=(0.5, 1.5), cargo=(10.0, 30.0)):
    """Random instance small enough for the oracles, with mixed feasibility."""
    rng = np.random.default_rng(seed)
    n = int(rng.integers(1, 8)) if n is None else n
    m = int(rng.integers(0, 4)) if m is None else m
    pts = rng.random((1 + n + m, 2))
    return Instance(
        depot=tuple(pts[0]),
        customers=[tuple(p) for p in pts[1 : n + 1]],
        demands=(10.0 * (1.0 - rng.random(n))).tolist(),
        stations=[tuple(p) for p in pts[n + 1 :]],
        cargo_capacity=float(rng.uniform(*cargo)),
        battery_capacity=float(rng.uniform(*battery)),
        consumption_rate=1.0,
        name=f"tiny-{seed}",
    )


def random_perm(n, seed):
    return [int(c) for c in np.random.default_rng(seed).permutation(n)]


def chained_instance():
    """One customer at 2.5 on a line with stations at 1 and 2.

    The battery holds 1.2: station hops of 1 are fine and the last half
    unit out and back fits, but no single stop bridges a gap.
    """
    return Instance(
        depot=(0.0, 0.0),
        customers=[(2.5, 0.0)],
        demands=[1.0],
        stations=[(1.0, 0.0), (2.0, 0.0)],
        cargo_capacity=10.0,
        battery_capacity=1.2,
        consumption_rate=1.0,
        name="chained",
    )


def one_customer(d=0.3, q=1.0, Q=10.0, B=1.0):
    return Instance(
        depot=(0.0, 0.0),
        customers=[(d, 0.0)],
        demands=[q],
        stations=[],
        cargo_capacity=Q,
        battery_capacity=B,
        consumption_rate=1.0,
        name="one",
    )


@pytest.fixture(params=BACKENDS)
def backend(request):
    return request.param
