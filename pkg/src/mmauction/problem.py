"""Core problem types shared by the solvers: instances, assignments, run records."""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np


class InfeasibleInstanceError(ValueError):
    """The instance admits no assignment serving every client and every AP."""


class UncoverableClientError(InfeasibleInstanceError):
    """A client lies outside the coverage disc of every AP."""

    def __init__(self, client: int):
        super().__init__(f"client {client} is not covered by any AP")
        self.client = client


class SizeGuardError(InfeasibleInstanceError):
    """An exhaustive search was requested on an instance that is too large."""


class NonTerminationError(RuntimeError):
    """An auction phase exceeded its iteration budget."""


class ConfigurationError(ValueError):
    pass


class Instance:
    """Integer-benefit multi-assignment instance.

    ``benefit[i, j]`` is meaningful only where ``adjacent[i, j]`` is true; the
    remaining entries are stored as zero.  Indices are zero-based.
    """

    def __init__(self, benefit, adjacent=None, scale_k: int = 1):
        b = np.asarray(benefit)
        if b.ndim != 2:
            raise ValueError("benefit must be a 2-D matrix")
        if adjacent is None:
            adjacent = np.ones(b.shape, dtype=bool)
        adj = np.asarray(adjacent, dtype=bool)
        if adj.shape != b.shape:
            raise ValueError("adjacency mask shape does not match benefit matrix")
        if b.dtype.kind == "f":
            if not np.all(np.floor(b[adj]) == b[adj]):
                raise ValueError("benefits must be integers")
        elif b.dtype.kind not in "iu":
            raise ValueError("benefits must be integers")
        b = np.where(adj, b, 0).astype(np.int64)
        if np.any(b < 0):
            raise ValueError("benefits must be non-negative")
        if scale_k < 1 or int(scale_k) != scale_k:
            raise ValueError("scale_k must be a positive integer")

        self.m, self.n = b.shape
        if self.m < 1:
            raise ValueError("need at least one AP")
        if self.n < self.m:
            raise ValueError(f"need n >= m, got m={self.m}, n={self.n}")
        self.scale_k = int(scale_k)
        b.setflags(write=False)
        adj = adj.copy()
        adj.setflags(write=False)
        self.benefit = b
        self.adjacent = adj
        self.adjacency_A = tuple(tuple(int(j) for j in np.flatnonzero(adj[i])) for i in range(self.m))
        self.adjacency_B = tuple(tuple(int(i) for i in np.flatnonzero(adj[:, j])) for j in range(self.n))
        for j, aps in enumerate(self.adjacency_B):
            if not aps:
                raise UncoverableClientError(j)
        for i, clients in enumerate(self.adjacency_A):
            if not clients:
                raise InfeasibleInstanceError(f"AP {i} has no reachable client")

    @classmethod
    def from_rows(cls, rows: Sequence[Sequence[int | None]], scale_k: int = 1) -> "Instance":
        """Build from nested lists where ``None`` marks a pair outside ``C``."""
        adj = [[v is not None for v in row] for row in rows]
        vals = [[0 if v is None else v for v in row] for row in rows]
        return cls(np.array(vals, dtype=np.int64), np.array(adj, dtype=bool), scale_k=scale_k)

    def pairs(self) -> Iterable[tuple[int, int]]:
        for i, clients in enumerate(self.adjacency_A):
            for j in clients:
                yield i, j

    @property
    def max_benefit(self) -> int:
        return int(self.benefit.max()) if self.benefit.size else 0

    def is_coverable(self) -> bool:
        """True when some assignment gives every AP at least one client.

        Every client already has an AP, so this reduces to a matching that
        saturates the APs (augmenting-path search).
        """
        match_client = [-1] * self.n

        def augment(i: int, seen: list[bool]) -> bool:
            for j in self.adjacency_A[i]:
                if seen[j]:
                    continue
                seen[j] = True
                if match_client[j] < 0 or augment(match_client[j], seen):
                    match_client[j] = i
                    return True
            return False

        return all(augment(i, [False] * self.n) for i in range(self.m))

    def to_json_dict(self) -> dict:
        rows = [
            [int(self.benefit[i, j]) if self.adjacent[i, j] else None for j in range(self.n)]
            for i in range(self.m)
        ]
        return {"benefit": rows, "scale_k": self.scale_k}

    @classmethod
    def from_json_dict(cls, data: dict) -> "Instance":
        return cls.from_rows(data["benefit"], scale_k=int(data.get("scale_k", 1)))

    def __repr__(self) -> str:
        return f"Instance(m={self.m}, n={self.n}, scale_k={self.scale_k})"


@dataclass(frozen=True)
class Assignment:
    """Set of AP/client pairs stored as one AP index (or None) per client."""

    client_of: tuple[int | None, ...]
    m: int

    @classmethod
    def empty(cls, m: int, n: int) -> "Assignment":
        return cls((None,) * n, m)

    @classmethod
    def from_pairs(cls, pairs: Iterable[tuple[int, int]], m: int, n: int) -> "Assignment":
        owner: list[int | None] = [None] * n
        for i, j in pairs:
            if owner[j] is not None:
                raise ValueError(f"client {j} appears in more than one pair")
            owner[j] = i
        return cls(tuple(owner), m)

    @property
    def n(self) -> int:
        return len(self.client_of)

    @property
    def pairs(self) -> frozenset[tuple[int, int]]:
        return frozenset((i, j) for j, i in enumerate(self.client_of) if i is not None)

    def clients_of(self, i: int) -> tuple[int, ...]:
        return tuple(j for j, owner in enumerate(self.client_of) if owner == i)

    def load(self) -> list[int]:
        counts = [0] * self.m
        for i in self.client_of:
            if i is not None:
                counts[i] += 1
        return counts

    @property
    def unassigned_clients(self) -> tuple[int, ...]:
        return tuple(j for j, i in enumerate(self.client_of) if i is None)

    @property
    def is_feasible(self) -> bool:
        return not self.unassigned_clients and min(self.load(), default=0) >= 1

    def respects(self, instance: Instance) -> bool:
        return all(instance.adjacent[i, j] for i, j in self.pairs)


def total_benefit(instance: Instance, assignment: Assignment) -> int:
    """Sum of integer-scaled benefits over the pairs of ``assignment``."""
    return int(sum(int(instance.benefit[i, j]) for i, j in assignment.pairs))


@dataclass
class Certificate:
    cs_a: bool | None = None
    cs_b: bool | None = None
    cs_c: bool | None = None

    @property
    def passed(self) -> bool:
        return bool(self.cs_a and self.cs_b and self.cs_c)


@dataclass
class RunRecord:
    """Measurements from one solver execution."""

    method: str
    m: int
    n: int
    total_benefit_scaled: int
    scale_k: int = 1
    seed: int | None = None
    epsilon: Fraction | None = None
    iterations_fwd: int = 0
    iterations_rev: int = 0
    bids_total: int = 0
    bids_fwd_per_ap: list[int] = field(default_factory=list)
    bids_rev_per_ap: list[int] = field(default_factory=list)
    wall_time_ms: float = 0.0
    certificate: Certificate | None = None
    feasible: bool = True

    @property
    def total_benefit(self) -> Fraction:
        return Fraction(self.total_benefit_scaled, self.scale_k)

    @property
    def certified(self) -> bool:
        """Certificate passed under the optimality preconditions (eps < 1/m)."""
        return (
            self.method == "auction"
            and self.certificate is not None
            and self.certificate.passed
            and self.feasible
            and self.epsilon is not None
            and self.epsilon < Fraction(1, self.m)
        )

    def to_json_dict(self) -> dict:
        d = asdict(self)
        d["total_benefit"] = float(self.total_benefit)
        d["epsilon"] = None if self.epsilon is None else str(self.epsilon)
        d["certified"] = self.certified
        return d

    def to_json(self) -> str:
        return json.dumps(self.to_json_dict(), indent=2)

    @classmethod
    def from_json_dict(cls, d: dict) -> "RunRecord":
        cert = d.get("certificate")
        return cls(
            method=d["method"],
            m=d["m"],
            n=d["n"],
            total_benefit_scaled=d["total_benefit_scaled"],
            scale_k=d.get("scale_k", 1),
            seed=d.get("seed"),
            epsilon=None if d.get("epsilon") is None else Fraction(d["epsilon"]),
            iterations_fwd=d.get("iterations_fwd", 0),
            iterations_rev=d.get("iterations_rev", 0),
            bids_total=d.get("bids_total", 0),
            bids_fwd_per_ap=list(d.get("bids_fwd_per_ap", [])),
            bids_rev_per_ap=list(d.get("bids_rev_per_ap", [])),
            wall_time_ms=d.get("wall_time_ms", 0.0),
            certificate=None if cert is None else Certificate(**cert),
            feasible=d.get("feasible", True),
        )
