"""(n,k)-MDS-coded caching systems.

A system of n nodes stores a file of M = k*t packets; each node holds t
coded packets, and any k nodes together must be able to rebuild the
file.  Coding vectors live over the M-dimensional virtual source.
"""

from __future__ import annotations

import json
import random
from dataclasses import dataclass, replace
from itertools import combinations
from typing import Optional, Sequence

import sympy

from .errors import ConstructionError, SchemaError, SingularMatrixError
from .fields import FieldMatrix, PrimeField

SCHEMA_VERSION = 1

BUILD_RETRIES = 64


@dataclass(frozen=True)
class SystemConfig:
    n: int
    k: int
    t: int
    q: int

    def __post_init__(self):
        if self.k < 1 or self.n <= self.k:
            raise ValueError(f"need n > k >= 1, got n={self.n}, k={self.k}")
        if self.t < 1:
            raise ValueError(f"need t >= 1, got t={self.t}")
        if not sympy.isprime(self.q):
            raise ValueError(f"field size must be prime, got q={self.q}")

    @property
    def m(self) -> int:
        """File size in packets (M = k*t)."""
        return self.k * self.t

    @property
    def field(self) -> PrimeField:
        return PrimeField(self.q)


@dataclass(frozen=True)
class CachingSystem:
    """Immutable snapshot of a coded caching network.

    coding_matrix has n*t rows; row i*t + j is the coding vector of
    packet j of node i over the M virtual source coordinates.
    """

    config: SystemConfig
    coding_matrix: FieldMatrix
    payload: Optional[tuple] = None

    def __post_init__(self):
        cfg = self.config
        if self.coding_matrix.nrows != cfg.n * cfg.t or self.coding_matrix.ncols != cfg.m:
            raise ValueError(
                f"coding matrix must be {cfg.n * cfg.t}x{cfg.m}, "
                f"got {self.coding_matrix.nrows}x{self.coding_matrix.ncols}"
            )
        if self.payload is not None and len(self.payload) != cfg.m:
            raise ValueError(f"payload must have {cfg.m} symbols")

    def node_row_indices(self, node: int) -> range:
        return range(node * self.config.t, (node + 1) * self.config.t)

    def node_rows(self, node: int) -> FieldMatrix:
        return self.coding_matrix.take_rows(self.node_row_indices(node))

    def with_coding_matrix(self, m: FieldMatrix) -> "CachingSystem":
        return replace(self, coding_matrix=m)


def verify_caching_mds(system: CachingSystem) -> bool:
    """True iff every k-subset of nodes stacks to rank M."""
    cfg = system.config
    for subset in combinations(range(cfg.n), cfg.k):
        rows = [i for node in subset for i in system.node_row_indices(node)]
        if system.coding_matrix.take_rows(rows).rank() < cfg.m:
            return False
    return True


def build_system(
    config: SystemConfig,
    seed: int = 0,
    systematic: bool = False,
    payload: Optional[Sequence[int]] = None,
) -> CachingSystem:
    """Construct a caching system satisfying the any-k-nodes property.

    Random construction samples coding vectors uniformly and retries up
    to 64 times; the systematic variant stores the raw source on the
    first k nodes and power-basis rows on the parity nodes.  Both are
    verified before returning.
    """
    field = config.field
    if payload is not None:
        payload = tuple(x % config.q for x in payload)
        if len(payload) != config.m:
            raise ValueError(f"payload must have {config.m} symbols")

    if systematic:
        rows = list(FieldMatrix.identity(field, config.m).entries)
        # Parity rows evaluate the power basis at points after the identity block.
        n_parity_rows = (config.n - config.k) * config.t
        if field.p <= n_parity_rows:
            raise ConstructionError(
                f"field GF({field.p}) too small for {n_parity_rows} distinct parity points"
            )
        for idx in range(n_parity_rows):
            x = idx + 1
            rows.append(tuple(pow(x, j, field.p) for j in range(config.m)))
        system = CachingSystem(config, FieldMatrix.from_rows(field, rows), payload)
        if not verify_caching_mds(system):
            raise ConstructionError(
                f"systematic construction is not MDS over GF({field.p}); use a larger field"
            )
        return system

    rng = random.Random(seed)
    for _ in range(BUILD_RETRIES):
        matrix = FieldMatrix.random(field, config.n * config.t, config.m, rng)
        system = CachingSystem(config, matrix, payload)
        if verify_caching_mds(system):
            return system
    raise ConstructionError(
        f"no MDS system found in {BUILD_RETRIES} random draws over GF({field.p}); "
        "the field is likely too small"
    )


def encode_payload(system: CachingSystem, source: Sequence[int]) -> tuple:
    """Materialize per-node packet values: value = coding vector . source."""
    cfg = system.config
    if len(source) != cfg.m:
        raise ValueError(f"source must have {cfg.m} symbols, got {len(source)}")
    values = system.coding_matrix.mul_vector(source)
    return tuple(values[i * cfg.t : (i + 1) * cfg.t] for i in range(cfg.n))


def collect(system: CachingSystem, nodes: Sequence[int]) -> tuple:
    """Recover the source from the packets of a k-subset of nodes."""
    cfg = system.config
    nodes = tuple(nodes)
    if len(set(nodes)) != cfg.k:
        raise ValueError(f"need exactly k={cfg.k} distinct nodes, got {nodes}")
    if system.payload is None:
        raise ValueError("system carries no payload to collect")
    packets = encode_payload(system, system.payload)
    rows = [i for node in nodes for i in system.node_row_indices(node)]
    values = [v for node in nodes for v in packets[node]]
    try:
        return system.coding_matrix.take_rows(rows).solve(values)
    except SingularMatrixError as exc:
        raise SingularMatrixError(f"nodes {nodes} cannot rebuild the file: {exc}") from exc


def system_to_json(system: CachingSystem) -> str:
    doc = {
        "schema_version": SCHEMA_VERSION,
        "n": system.config.n,
        "k": system.config.k,
        "t": system.config.t,
        "q": system.config.q,
        "coding_matrix": system.coding_matrix.to_lists(),
        "payload": list(system.payload) if system.payload is not None else None,
    }
    return json.dumps(doc, sort_keys=True, separators=(",", ":")) + "\n"


def system_from_json(text: str) -> CachingSystem:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SchemaError(f"invalid JSON: {exc}") from exc
    try:
        config = SystemConfig(n=doc["n"], k=doc["k"], t=doc["t"], q=doc["q"])
        matrix = FieldMatrix.from_rows(config.field, doc["coding_matrix"])
        payload = doc.get("payload")
        return CachingSystem(config, matrix, tuple(payload) if payload is not None else None)
    except (KeyError, TypeError, ValueError) as exc:
        raise SchemaError(f"bad system descriptor: {exc}") from exc
