"""Broadcast budgeting, allocation, and repair execution."""

import random
from fractions import Fraction

import pytest

from securepair.caching import SystemConfig, build_system, verify_caching_mds
from securepair.errors import InfeasiblePatternError, RepairError, SchemaError
from securepair.fields import FieldMatrix
from securepair.repair import (
    ErasurePattern,
    RepairPlan,
    allocate_transmissions,
    check_feasible,
    functional_repair,
    min_broadcasts_bruteforce,
    min_broadcasts_formula,
    pattern_from_json,
    pattern_to_json,
    plan_from_json,
    plan_to_json,
)


def test_pattern_validation():
    with pytest.raises(ValueError):
        ErasurePattern(((1, 0),), 2)  # not sorted
    with pytest.raises(ValueError):
        ErasurePattern(((0, 0),), 2)  # duplicate
    with pytest.raises(ValueError):
        ErasurePattern(((0, 2),), 2)  # out of range
    p = ErasurePattern.from_counts((2, 1, 0), 2)
    assert p.counts == (2, 1, 0)
    assert p.n_healthy == 1
    assert p.total_erased == 3
    assert p.erased(1) == (1,)


def test_check_feasible_hand_case():
    # (4,2)-system, t=2, nodes 3 and 4 each lost one packet
    pattern = ErasurePattern.from_counts((2, 2, 1, 1), 2)
    assert check_feasible(pattern, (1, 1, 0, 0), 2)
    # the sick nodes cannot serve themselves: the cut at {node 3, node 4}
    # needs two broadcasts from outside
    assert not check_feasible(pattern, (0, 0, 1, 1), 2)
    assert not check_feasible(pattern, (1, 0, 0, 0), 2)
    # piling both broadcasts on one node starves the cuts through it
    assert not check_feasible(pattern, (2, 0, 0, 0), 2)


def test_formula_all_healthy_is_zero():
    pattern = ErasurePattern.from_counts((2, 2, 2, 2), 2)
    assert min_broadcasts_formula(pattern, 2) == 0
    assert min_broadcasts_bruteforce(pattern, 2) == 0


def test_bruteforce_matches_direct_scan():
    # independent check: smallest total over all capped vectors
    rng = random.Random(11)
    from itertools import product

    for _ in range(25):
        n = rng.randint(2, 4)
        k = rng.randint(1, n - 1)
        t = rng.randint(1, 3)
        counts = tuple(rng.randint(0, t) for _ in range(n))
        pattern = ErasurePattern.from_counts(counts, t)
        if pattern.total_surviving < k * t:
            with pytest.raises(InfeasiblePatternError):
                min_broadcasts_bruteforce(pattern, k)
            continue
        best = min(
            sum(r)
            for r in product(*(range(c + 1) for c in counts))
            if check_feasible(pattern, r, k)
        )
        assert min_broadcasts_bruteforce(pattern, k) == best


def test_full_budget_always_feasible():
    # broadcasting kt packets always satisfies every cut
    rng = random.Random(3)
    for _ in range(50):
        n = rng.randint(2, 5)
        k = rng.randint(1, n - 1)
        t = rng.randint(1, 3)
        counts = tuple(rng.randint(0, t) for _ in range(n))
        pattern = ErasurePattern.from_counts(counts, t)
        if pattern.total_surviving < k * t:
            continue
        assert min_broadcasts_bruteforce(pattern, k) <= k * t


def test_allocation_is_optimal_and_feasible():
    pattern = ErasurePattern.from_counts((2, 2, 1, 1), 2)
    plan = allocate_transmissions(pattern, 2)
    assert plan.total == min_broadcasts_bruteforce(pattern, 2)
    assert check_feasible(pattern, plan.counts, 2)
    # healthy nodes are preferred as transmitters
    assert plan.counts == (1, 1, 0, 0)


def test_functional_repair_random():
    cfg = SystemConfig(n=4, k=2, t=2, q=13)
    system = build_system(cfg, seed=2)
    pattern = ErasurePattern(((0, 1), (0, 1), (0,), (0,)), 2)
    plan = allocate_transmissions(pattern, cfg.k)
    outcome = functional_repair(system, pattern, plan, seed=9)
    assert verify_caching_mds(outcome.system)
    assert outcome.broadcasts.nrows == plan.total


def test_functional_repair_exact_with_fixed_broadcasts(fixture_text):
    from securepair.caching import system_from_json

    system = system_from_json(fixture_text("demo_system.json"))
    pattern = pattern_from_json(fixture_text("demo_pattern.json"))
    plan = plan_from_json(fixture_text("demo_plan.json"), system.config.field)
    outcome = functional_repair(system, pattern, plan, exact=True)
    # exact repair restores the original coding vectors in one shot
    assert outcome.attempts == 1
    assert outcome.system.coding_matrix == system.coding_matrix


def test_repair_rejects_infeasible_plan():
    cfg = SystemConfig(n=4, k=2, t=2, q=13)
    system = build_system(cfg, seed=2)
    pattern = ErasurePattern(((0, 1), (0, 1), (0,), (0,)), 2)
    with pytest.raises(InfeasiblePatternError):
        functional_repair(system, pattern, RepairPlan((1, 0, 0, 0)))


def test_repair_rejects_unavailable_broadcast():
    cfg = SystemConfig(n=4, k=2, t=2, q=13)
    system = build_system(cfg, seed=2)
    pattern = ErasurePattern(((0, 1), (0, 1), (0,), (0,)), 2)
    rng = random.Random(0)
    foreign = FieldMatrix.random(cfg.field, 2, cfg.m, rng)
    plan = RepairPlan((1, 1, 0, 0), foreign)
    with pytest.raises(ValueError):
        functional_repair(system, pattern, plan)


def test_no_erasure_is_noop():
    cfg = SystemConfig(n=3, k=2, t=1, q=7)
    system = build_system(cfg, seed=0)
    pattern = ErasurePattern.from_counts((1, 1, 1), 1)
    outcome = functional_repair(system, pattern, RepairPlan((0, 0, 0)))
    assert outcome.system.coding_matrix == system.coding_matrix
    assert outcome.broadcasts.nrows == 0


def test_pattern_and_plan_json_roundtrip():
    pattern = ErasurePattern(((0, 2), (1,), ()), 3)
    assert pattern_from_json(pattern_to_json(pattern)) == pattern
    from securepair.fields import PrimeField

    f = PrimeField(3)
    plan = RepairPlan((1, 1, 0), FieldMatrix.from_rows(f, [[1, 0], [0, 1]]))
    back = plan_from_json(plan_to_json(plan), f)
    assert back.counts == plan.counts
    assert back.broadcast_matrix == plan.broadcast_matrix
    with pytest.raises(SchemaError):
        plan_from_json('{"r": [1, 1], "gamma": 5}', f)
