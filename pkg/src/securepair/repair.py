"""Partial-repair planning and execution.

Feasibility of a per-node broadcast allocation follows the cut
condition: for every k-subset D of nodes, the nodes outside D must
broadcast at least k*t - sum_{i in D} |P_i| packets.  The closed-form
budget evaluates the published two-branch expression; the brute-force
search is the independent integer optimum and the two are compared in
the test suite.
"""

from __future__ import annotations

import json
import math
import random
from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations
from typing import Optional, Sequence

from .caching import CachingSystem, verify_caching_mds
from .errors import InfeasiblePatternError, RepairError, SchemaError, SearchSpaceError
from .fields import FieldMatrix

SCHEMA_VERSION = 1

REPAIR_RETRIES = 64
BRUTEFORCE_MAX_NODES = 6
BRUTEFORCE_MAX_T = 4


@dataclass(frozen=True)
class ErasurePattern:
    """Per-node surviving packet indices after an erasure event."""

    surviving: tuple  # tuple of sorted index tuples, one per node
    t: int

    def __post_init__(self):
        for i, kept in enumerate(self.surviving):
            if len(set(kept)) != len(kept) or tuple(sorted(kept)) != tuple(kept):
                raise ValueError(f"node {i}: surviving indices must be sorted and unique")
            if any(not 0 <= j < self.t for j in kept):
                raise ValueError(f"node {i}: packet index out of range [0, {self.t})")

    @classmethod
    def from_counts(cls, counts: Sequence[int], t: int) -> "ErasurePattern":
        """Pattern keeping the first |P_i| packets of each node."""
        return cls(tuple(tuple(range(c)) for c in counts), t)

    @property
    def n(self) -> int:
        return len(self.surviving)

    @property
    def counts(self) -> tuple:
        return tuple(len(kept) for kept in self.surviving)

    @property
    def n_healthy(self) -> int:
        return sum(1 for kept in self.surviving if len(kept) == self.t)

    @property
    def total_surviving(self) -> int:
        return sum(self.counts)

    @property
    def total_erased(self) -> int:
        return self.n * self.t - self.total_surviving

    def erased(self, node: int) -> tuple:
        kept = set(self.surviving[node])
        return tuple(j for j in range(self.t) if j not in kept)


@dataclass(frozen=True)
class RepairPlan:
    """Broadcast counts per node, plus coding vectors once transmitted.

    broadcast_matrix rows are grouped by node in node order: the first
    counts[0] rows come from node 0, and so on.
    """

    counts: tuple
    broadcast_matrix: Optional[FieldMatrix] = None

    @property
    def total(self) -> int:
        return sum(self.counts)


def _require_recoverable(pattern: ErasurePattern, k: int) -> None:
    if pattern.total_surviving < k * pattern.t:
        raise InfeasiblePatternError(
            f"only {pattern.total_surviving} packets survive; "
            f"{k * pattern.t} are needed to retain the file"
        )


def check_feasible(pattern: ErasurePattern, counts_r: Sequence[int], k: int) -> bool:
    """Cut condition over every k-subset of nodes."""
    if len(counts_r) != pattern.n:
        raise ValueError("broadcast count vector length mismatch")
    kt = k * pattern.t
    survive = pattern.counts
    total_r = sum(counts_r)
    for subset in combinations(range(pattern.n), k):
        inside_r = sum(counts_r[i] for i in subset)
        inside_p = sum(survive[i] for i in subset)
        if total_r - inside_r < kt - inside_p:
            return False
    return True


def _comb0(a: int, b: int) -> int:
    return math.comb(a, b) if 0 <= b <= a else 0


def min_broadcasts_formula(pattern: ErasurePattern, k: int) -> Fraction:
    """Closed-form minimum broadcast budget (two-branch expression).

    Returns a rational; packet counts are obtained by rounding up.  The
    brute-force search below is the ground truth; agreement between the
    two is a test-suite concern, not assumed here.
    """
    _require_recoverable(pattern, k)
    n, t = pattern.n, pattern.t
    kt = k * t
    total = pattern.total_surviving
    n_h = pattern.n_healthy
    if n_h == n:
        return Fraction(0)
    if n_h > k:
        den = _comb0(n - 1, k) - _comb0(n_h - 1, k)
        value = Fraction(_comb0(n, k) * kt, den) - Fraction(
            (_comb0(n - 1, k - 1) - _comb0(n_h - 1, k - 1)) * total, den
        )
    else:
        value = Fraction(n * kt - k * total, n - k)
    return min(Fraction(kt), value)


def min_broadcasts_bruteforce(pattern: ErasurePattern, k: int) -> int:
    """Exhaustive integer optimum of the total broadcast count.

    Searches all vectors 0 <= r_i <= |P_i| (a node cannot contribute
    more independent packets than it stores) in ascending total order
    and returns the first feasible total.
    """
    _require_recoverable(pattern, k)
    if pattern.n > BRUTEFORCE_MAX_NODES or pattern.t > BRUTEFORCE_MAX_T:
        raise SearchSpaceError(
            f"brute force limited to n <= {BRUTEFORCE_MAX_NODES}, t <= {BRUTEFORCE_MAX_T}"
        )
    caps = pattern.counts
    for total in range(sum(caps) + 1):
        for r in _compositions(total, caps):
            if check_feasible(pattern, r, k):
                return total
    raise InfeasiblePatternError("no feasible broadcast vector exists")  # unreachable


def _compositions(total: int, caps: Sequence[int]):
    """All vectors with given component caps summing to total."""
    if not caps:
        if total == 0:
            yield ()
        return
    first_cap = caps[0]
    for head in range(min(total, first_cap) + 1):
        for tail in _compositions(total - head, caps[1:]):
            yield (head,) + tail


def allocate_transmissions(pattern: ErasurePattern, k: int) -> RepairPlan:
    """Pick an optimal broadcast vector deterministically.

    Among all vectors achieving the brute-force optimum, prefers loading
    healthy nodes first and lower-index nodes within each group.
    """
    _require_recoverable(pattern, k)
    best_total = min_broadcasts_bruteforce(pattern, k)
    order = [i for i in range(pattern.n) if pattern.counts[i] == pattern.t]
    order += [i for i in range(pattern.n) if pattern.counts[i] < pattern.t]
    best = None
    for r in _compositions(best_total, pattern.counts):
        if check_feasible(pattern, r, k):
            key = tuple(r[i] for i in order)
            if best is None or key > best[0]:
                best = (key, r)
    assert best is not None
    return RepairPlan(counts=best[1])


@dataclass(frozen=True)
class RepairOutcome:
    system: CachingSystem
    broadcasts: FieldMatrix
    attempts: int


def _validate_against_system(system: CachingSystem, pattern: ErasurePattern) -> None:
    cfg = system.config
    if pattern.n != cfg.n or pattern.t != cfg.t:
        raise ValueError("erasure pattern does not match the system's dimensions")
    _require_recoverable(pattern, cfg.k)


def _random_combination(rows: FieldMatrix, rng: random.Random) -> tuple:
    coeffs = rows.field.rand_vector(rows.nrows, rng)
    p = rows.field.p
    return tuple(
        sum(c * row[j] for c, row in zip(coeffs, rows.entries)) % p for j in range(rows.ncols)
    )


def functional_repair(
    system: CachingSystem,
    pattern: ErasurePattern,
    plan: RepairPlan,
    seed: int = 0,
    exact: bool = False,
) -> RepairOutcome:
    """Execute a repair round over the broadcast channels.

    Each transmitting node broadcasts combinations of its surviving
    coding vectors (the plan's broadcast_matrix if given, random
    otherwise).  Sick nodes refill erased slots from their survivors
    plus all broadcasts; with exact=True the refill solves for the
    original erased vectors instead of randomizing.  Retries with fresh
    randomness until the repaired system passes the MDS check.
    """
    cfg = system.config
    _validate_against_system(system, pattern)
    if len(plan.counts) != cfg.n:
        raise ValueError("plan has wrong node count")
    for i, (r_i, kept) in enumerate(zip(plan.counts, pattern.surviving)):
        if r_i < 0 or r_i > len(kept):
            raise ValueError(f"node {i} cannot broadcast {r_i} packets with {len(kept)} stored")
    if not check_feasible(pattern, plan.counts, cfg.k):
        raise InfeasiblePatternError(f"broadcast counts {plan.counts} violate the cut condition")

    if pattern.total_erased == 0:
        return RepairOutcome(system, FieldMatrix(cfg.field, ()), attempts=0)

    fixed = plan.broadcast_matrix
    if fixed is not None:
        if fixed.nrows != plan.total or (fixed.nrows and fixed.ncols != cfg.m):
            raise ValueError("broadcast matrix shape does not match the plan")
        offset = 0
        for i, r_i in enumerate(plan.counts):
            survivors = _surviving_rows(system, pattern, i)
            for j in range(offset, offset + r_i):
                if not survivors.rowspace_contains(fixed.row(j)):
                    raise ValueError(f"broadcast row {j} is not available to node {i}")
            offset += r_i

    rng = random.Random(seed)
    deterministic = fixed is not None and exact
    attempts = REPAIR_RETRIES if not deterministic else 1
    for attempt in range(1, attempts + 1):
        broadcasts = fixed if fixed is not None else _draw_broadcasts(system, pattern, plan, rng)
        try:
            repaired = _refill(system, pattern, broadcasts, rng, exact)
        except RepairError:
            if deterministic:
                raise
            continue
        if verify_caching_mds(repaired):
            return RepairOutcome(repaired, broadcasts, attempts=attempt)
        if deterministic:
            break
    raise RepairError(
        f"repair failed after {attempts} attempt(s) over GF({cfg.q}); "
        "the field is likely too small"
    )


def _surviving_rows(system: CachingSystem, pattern: ErasurePattern, node: int) -> FieldMatrix:
    base = node * system.config.t
    return system.coding_matrix.take_rows([base + j for j in pattern.surviving[node]])


def _draw_broadcasts(
    system: CachingSystem, pattern: ErasurePattern, plan: RepairPlan, rng: random.Random
) -> FieldMatrix:
    rows = []
    for i, r_i in enumerate(plan.counts):
        survivors = _surviving_rows(system, pattern, i)
        for _ in range(r_i):
            rows.append(_random_combination(survivors, rng))
    return FieldMatrix.from_rows(system.config.field, rows) if rows else FieldMatrix(
        system.config.field, ()
    )


def _refill(
    system: CachingSystem,
    pattern: ErasurePattern,
    broadcasts: FieldMatrix,
    rng: random.Random,
    exact: bool,
) -> CachingSystem:
    cfg = system.config
    new_rows = [list(r) for r in system.coding_matrix.entries]
    for node in range(cfg.n):
        erased = pattern.erased(node)
        if not erased:
            continue
        available = _surviving_rows(system, pattern, node).vstack(broadcasts)
        for j in erased:
            idx = node * cfg.t + j
            if exact:
                target = system.coding_matrix.row(idx)
                if not available.rowspace_contains(target):
                    raise RepairError(
                        f"node {node} cannot exactly recover packet {j} from the broadcasts"
                    )
                new_rows[idx] = list(target)
            else:
                new_rows[idx] = list(_random_combination(available, rng))
    return system.with_coding_matrix(FieldMatrix.from_rows(cfg.field, new_rows))


def pattern_to_json(pattern: ErasurePattern) -> str:
    doc = {
        "schema_version": SCHEMA_VERSION,
        "t": pattern.t,
        "surviving": [list(kept) for kept in pattern.surviving],
    }
    return json.dumps(doc, sort_keys=True, separators=(",", ":")) + "\n"


def pattern_from_json(text: str, t: Optional[int] = None) -> ErasurePattern:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SchemaError(f"invalid JSON: {exc}") from exc
    try:
        t_value = doc["t"] if t is None else t
        return ErasurePattern(tuple(tuple(kept) for kept in doc["surviving"]), t_value)
    except (KeyError, TypeError, ValueError) as exc:
        raise SchemaError(f"bad erasure pattern: {exc}") from exc


def plan_to_json(plan: RepairPlan) -> str:
    doc = {
        "schema_version": SCHEMA_VERSION,
        "r": list(plan.counts),
        "gamma": plan.total,
        "broadcast_matrix": plan.broadcast_matrix.to_lists()
        if plan.broadcast_matrix is not None
        else None,
    }
    return json.dumps(doc, sort_keys=True, separators=(",", ":")) + "\n"


def plan_from_json(text: str, field) -> RepairPlan:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SchemaError(f"invalid JSON: {exc}") from exc
    try:
        counts = tuple(doc["r"])
        matrix = doc.get("broadcast_matrix")
        plan = RepairPlan(
            counts,
            FieldMatrix.from_rows(field, matrix) if matrix is not None else None,
        )
        if doc.get("gamma") is not None and doc["gamma"] != plan.total:
            raise SchemaError(f"gamma {doc['gamma']} does not match counts {counts}")
        return plan
    except (KeyError, TypeError, ValueError) as exc:
        raise SchemaError(f"bad repair plan: {exc}") from exc
