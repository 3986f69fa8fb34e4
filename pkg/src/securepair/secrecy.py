"""Eavesdropper leakage audits, secrecy capacities, and precoder search.

The virtual source splits into secret and key coordinates.  For linear
broadcast schemes with uniform independent coordinates, the leakage
about the secrets is rank(W) - rank(B), where W maps the virtual source
to the overheard packets and B is W restricted to the key columns.
That identity is validated against an exhaustive entropy computation
rather than assumed.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations, product
from typing import Optional, Sequence

import sympy

from .caching import CachingSystem
from .errors import BoundOverflowError, SearchExhaustedError, SearchSpaceError
from .fields import FieldMatrix, PrimeField
from .repair import RepairPlan

SCHEMA_VERSION = 1

BOUND_LIMIT = 2**62
ENTROPY_STATE_LIMIT = 10**7
PRECODER_RETRIES = 1024


@dataclass(frozen=True)
class SecretPartition:
    """Split of the M virtual-source coordinates into secrets and keys."""

    secret_indices: tuple
    key_indices: tuple

    def __post_init__(self):
        overlap = set(self.secret_indices) & set(self.key_indices)
        if overlap:
            raise ValueError(f"indices {sorted(overlap)} are both secret and key")

    def validate(self, m: int) -> None:
        if set(self.secret_indices) | set(self.key_indices) != set(range(m)):
            raise ValueError(f"partition must cover exactly coordinates 0..{m - 1}")

    @classmethod
    def all_secret(cls, m: int) -> "SecretPartition":
        return cls(tuple(range(m)), ())


@dataclass(frozen=True)
class EavesdropperView:
    """Linear map W from the virtual source to the overheard packets."""

    w: FieldMatrix
    m: int  # virtual source dimension (w may have zero rows)

    @property
    def field(self) -> PrimeField:
        return self.w.field

    def secret_columns(self, partition: SecretPartition) -> FieldMatrix:
        return self.w.take_columns(partition.secret_indices)

    def key_columns(self, partition: SecretPartition) -> FieldMatrix:
        return self.w.take_columns(partition.key_indices)


@dataclass(frozen=True)
class SecrecyAudit:
    leakage_qary: int
    strong_secure: bool
    weak_flags: tuple

    def to_dict(self) -> dict:
        return {
            "schema_version": SCHEMA_VERSION,
            "leakage_qary": self.leakage_qary,
            "strong_secure": self.strong_secure,
            "weak_flags": list(self.weak_flags),
        }


@dataclass(frozen=True)
class Precoder:
    """Invertible mix of (secrets || keys) applied before the MDS encoder."""

    t: FieldMatrix

    def __post_init__(self):
        if not self.t.is_invertible():
            raise ValueError("precoder matrix must be invertible")


@dataclass(frozen=True)
class CapacityReport:
    c_ss: int
    c_ws: int
    q_min_strong: int
    q_min_weak: Optional[int]

    def to_dict(self) -> dict:
        return {
            "schema_version": SCHEMA_VERSION,
            "c_ss": self.c_ss,
            "c_ws": self.c_ws,
            "q_min_strong": self.q_min_strong,
            "q_min_weak": self.q_min_weak,
        }


def eavesdropper_view(
    system: CachingSystem, plan: RepairPlan, precoder: Optional[Precoder] = None
) -> EavesdropperView:
    """What the eavesdropper sees: broadcast vectors, precoded if any."""
    m = system.config.m
    if plan.broadcast_matrix is None:
        raise ValueError("plan carries no broadcast matrix; run the repair first")
    w = plan.broadcast_matrix
    if w.nrows == 0:
        return EavesdropperView(FieldMatrix(system.config.field, ()), m)
    if precoder is not None:
        if precoder.t.nrows != m:
            raise ValueError(f"precoder must be {m}x{m}")
        w = w @ precoder.t
    return EavesdropperView(w, m)


def strong_leakage(view: EavesdropperView, partition: SecretPartition) -> int:
    """Leakage about the joint secrets, in log_q units."""
    partition.validate(view.m)
    if view.w.nrows == 0:
        return 0
    return view.w.rank() - view.key_columns(partition).rank()


def weak_flags(view: EavesdropperView, partition: SecretPartition) -> tuple:
    """Per-secret safety: symbol i is safe iff its unit vector is not in
    the row space of W."""
    partition.validate(view.m)
    flags = []
    for idx in partition.secret_indices:
        unit = tuple(1 if j == idx else 0 for j in range(view.m))
        flags.append(not view.w.rowspace_contains(unit))
    return tuple(flags)


def audit(view: EavesdropperView, partition: SecretPartition) -> SecrecyAudit:
    leakage = strong_leakage(view, partition)
    return SecrecyAudit(
        leakage_qary=leakage,
        strong_secure=leakage == 0,
        weak_flags=weak_flags(view, partition),
    )


def _log_q(count: int, q: int) -> int:
    """log_q(count) for exact powers of q; linear fibers are always such."""
    e = 0
    while count % q == 0:
        count //= q
        e += 1
    if count != 1:
        raise ArithmeticError(f"count is not a power of {q}; view is not linear")
    return e


def entropy_bruteforce(view: EavesdropperView, partition: SecretPartition) -> Fraction:
    """Exact H(secrets | observations) in log_q units, by enumerating
    every virtual source vector with uniform independent coordinates."""
    partition.validate(view.m)
    q = view.field.p
    states = q**view.m
    if states > ENTROPY_STATE_LIMIT:
        raise SearchSpaceError(f"q^M = {states} exceeds the enumeration limit")
    obs_counts: dict = {}
    joint_counts: dict = {}
    for x in product(range(q), repeat=view.m):
        e = view.w.mul_vector(x) if view.w.nrows else ()
        s = tuple(x[i] for i in partition.secret_indices)
        obs_counts[e] = obs_counts.get(e, 0) + 1
        joint_counts[(e, s)] = joint_counts.get((e, s), 0) + 1
    # H(S|E) = H(S,E) - H(E); with counts c over N states,
    # H(X) = log_q N - (1/N) * sum_x c_x log_q c_x.
    sum_obs = sum(c * _log_q(c, q) for c in obs_counts.values())
    sum_joint = sum(c * _log_q(c, q) for c in joint_counts.values())
    return Fraction(sum_obs - sum_joint, states)


def capacity_strong(m: int, gamma_min: int) -> int:
    return m - gamma_min if gamma_min < m else 0


def capacity_weak(m: int, gamma: int) -> int:
    return m if gamma < m else 0


def _next_prime_at_least(x: int) -> int:
    x = max(x, 2)
    return x if sympy.isprime(x) else int(sympy.nextprime(x))


def field_bound_strong(m: int, gamma: int) -> int:
    """Smallest prime q with q >= C(M, Gamma)."""
    if gamma > m:
        raise ValueError(f"gamma={gamma} exceeds M={m}")
    bound = math.comb(m, gamma)
    if bound > BOUND_LIMIT:
        raise BoundOverflowError(f"binomial bound {bound} exceeds 2^62", bound)
    return _next_prime_at_least(bound)


def field_bound_weak(m: int, gamma: int) -> int:
    """Smallest prime q with q^M >= C(M, Gamma) * q^Gamma + q^(M-1)."""
    if gamma >= m:
        raise ValueError(f"weak bound requires gamma < M, got gamma={gamma}, M={m}")
    bound = math.comb(m, gamma)
    q = 2
    while q**m < bound * q**gamma + q ** (m - 1):
        q = int(sympy.nextprime(q))
    return q


def capacity_report(m: int, gamma: int, gamma_min: int) -> CapacityReport:
    return CapacityReport(
        c_ss=capacity_strong(m, gamma_min),
        c_ws=capacity_weak(m, gamma),
        q_min_strong=field_bound_strong(m, gamma_min),
        q_min_weak=field_bound_weak(m, gamma) if gamma < m else None,
    )


def _candidate_views(
    system: CachingSystem,
    plan: RepairPlan,
    scope: str,
    universe: Optional[FieldMatrix],
) -> list:
    m = system.config.m
    if scope == "fixed":
        if plan.broadcast_matrix is None:
            raise ValueError("fixed scope needs the plan's broadcast matrix")
        return [plan.broadcast_matrix]
    if scope != "universal":
        raise ValueError(f"unknown scope {scope!r}; expected 'fixed' or 'universal'")
    # Universal scope: protect every Gamma-subset of a universe of packets.
    # The default universe is the M independent packets of the underlying
    # multicast model (the virtual source coordinates themselves); pass the
    # system's full coding matrix for the stricter any-stored-packets reading.
    if universe is None:
        universe = FieldMatrix.identity(system.config.field, m)
    gamma = plan.total
    return [universe.take_rows(subset) for subset in combinations(range(universe.nrows), gamma)]


def construct_precoder(
    system: CachingSystem,
    plan: RepairPlan,
    mode: str,
    scope: str,
    partition: SecretPartition,
    seed: int = 0,
    universe: Optional[FieldMatrix] = None,
    max_tries: int = PRECODER_RETRIES,
) -> Precoder:
    """Randomized search for a security precoder.

    Samples invertible matrices uniformly and keeps the first one under
    which every audited view is secure in the requested mode.
    """
    cfg = system.config
    m = cfg.m
    partition.validate(m)
    gamma = plan.total
    if mode == "strong":
        if len(partition.key_indices) < gamma:
            raise ValueError(
                f"strong mode needs at least gamma={gamma} key coordinates, "
                f"got {len(partition.key_indices)}"
            )
    elif mode == "weak":
        if gamma >= m:
            raise ValueError(f"weak mode requires gamma < M, got gamma={gamma}, M={m}")
    else:
        raise ValueError(f"unknown mode {mode!r}; expected 'strong' or 'weak'")

    views = _candidate_views(system, plan, scope, universe)
    rng = random.Random(seed)
    for _ in range(max_tries):
        t = FieldMatrix.random(cfg.field, m, m, rng)
        if not t.is_invertible():
            continue
        ok = True
        for w in views:
            v = EavesdropperView(w @ t, m)
            if mode == "strong":
                if strong_leakage(v, partition) != 0:
                    ok = False
                    break
            else:
                if not all(weak_flags(v, partition)):
                    ok = False
                    break
        if ok:
            return Precoder(t)
    bound = field_bound_strong(m, gamma) if mode == "strong" else field_bound_weak(m, gamma)
    raise SearchExhaustedError(
        f"no {mode} precoder found in {max_tries} tries over GF({cfg.q}); "
        f"the sufficient field size for (M={m}, gamma={gamma}) is q >= {bound}"
    )
