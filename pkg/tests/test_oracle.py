import math

import pytest

from evdecode.charging_graph import build
from evdecode.fp_fla import decode
from evdecode.model import DEPOT, Instance, station, validate
from evdecode.oracle import BudgetExceeded, OracleBudget, brute_fpscp, brute_fpscp_enumerate, brute_frvcp, is_close
from evdecode.split import split

from conftest import one_customer, random_perm, tiny_instance


def test_one_customer():
    res = brute_fpscp(one_customer(d=0.25), [0])
    assert res.distance == 0.5


def test_infeasible():
    inst = Instance((0, 0), [(3, 0)], [1], [], 10, 1, 1)
    assert not brute_fpscp(inst, [0]).feasible
    assert not brute_fpscp_enumerate(inst, [0]).feasible


def test_budget_limits():
    with pytest.raises(ValueError):
        OracleBudget(max_customers=0)
    big = tiny_instance(0, n=8, m=1)
    with pytest.raises(BudgetExceeded):
        brute_fpscp(big, list(range(8)))
    with pytest.raises(BudgetExceeded):
        brute_fpscp(tiny_instance(0, n=3, m=3), [0, 1, 2], OracleBudget(max_expansions=1))


@pytest.mark.parametrize("seed", range(40))
def test_memoised_matches_enumeration(seed):
    inst = tiny_instance(seed, n=1 + seed % 3, m=seed % 3)
    perm = random_perm(inst.n, seed)
    a, b = brute_fpscp(inst, perm), brute_fpscp_enumerate(inst, perm)
    assert a.feasible == b.feasible
    if a.feasible:
        assert is_close(a.distance, b.distance)
        assert validate(inst, perm, a.solution) == []
        assert validate(inst, perm, b.solution) == []


def test_depot_detour_may_repeat_a_station():
    # the depot is only reachable through the station, on both sides
    inst = Instance(
        depot=(0.0, 0.0),
        customers=[(1.3, 0.0), (1.3, 0.1)],
        demands=[6.0, 6.0],
        stations=[(0.9, 0.0)],
        cargo_capacity=10.0,
        battery_capacity=1.0,
        consumption_rate=1.0,
    )
    res = brute_fpscp(inst, [0, 1])
    assert res.feasible
    assert res.solution.sequence[3:6] == (station(0), DEPOT, station(0))
    assert validate(inst, [0, 1], res.solution) == []
    assert math.isclose(decode(inst, build(inst), [0, 1]).distance, res.distance, rel_tol=1e-12)


def test_frvcp_plan_without_charging():
    inst = tiny_instance(1, n=4, m=2, battery=(40, 50))
    plan = split(inst, [0, 1, 2, 3])
    assert brute_frvcp(inst, plan).distance == plan.total_distance
    assert not brute_frvcp(inst, None).feasible


def test_is_close():
    assert is_close(math.inf, math.inf)
    assert not is_close(1.0, math.inf)
    assert is_close(1.0, 1.0 + 1e-12)
    assert not is_close(1.0, 1.001)
