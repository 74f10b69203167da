"""Forward/reverse auction for the AP-client multi-assignment problem.

The forward phase lets every AP win exactly one client (APs bid, client prices
rise).  The reverse phase then lets the remaining clients bid for APs, raising
AP profits up to the frozen cap ``lambda_price``; an AP already at the cap
accepts additional clients without evicting anyone.

Arithmetic is exact.  Benefits and prices are multiplied by a common
denominator ``q`` (the lcm of the denominators of epsilon and any starting
prices), so the inner loops run on Python ints and the equality condition of
epsilon-complementary slackness holds without rounding slop.  Public results
are returned as :class:`fractions.Fraction` on the original benefit scale.
"""

from __future__ import annotations

import heapq
import math
import time
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Optional

from mmauction.problem import (
    Assignment,
    Certificate,
    ConfigurationError,
    InfeasibleInstanceError,
    Instance,
    NonTerminationError,
    RunRecord,
    total_benefit,
)


def as_fraction(x) -> Fraction:
    """Exact rational from int/str/Fraction; floats go through their shortest repr."""
    if isinstance(x, float):
        return Fraction(repr(x))
    return Fraction(x)


@dataclass(frozen=True)
class PriceState:
    pi: tuple[Fraction, ...]
    p: tuple[Fraction, ...]
    lambda_price: Fraction | None = None

    @classmethod
    def zeros(cls, m: int, n: int) -> "PriceState":
        return cls((Fraction(0),) * m, (Fraction(0),) * n, None)

    def to_json_dict(self) -> dict:
        return {
            "pi": [str(v) for v in self.pi],
            "p": [str(v) for v in self.p],
            "lambda_price": None if self.lambda_price is None else str(self.lambda_price),
        }

    @classmethod
    def from_json_dict(cls, d: dict) -> "PriceState":
        lam = d.get("lambda_price")
        return cls(
            tuple(Fraction(v) for v in d["pi"]),
            tuple(Fraction(v) for v in d["p"]),
            None if lam is None else Fraction(lam),
        )


@dataclass(frozen=True)
class AuctionConfig:
    """Solver settings.

    ``epsilon`` defaults to ``1/(m+1)``.  ``max_price_increment`` replaces the
    infinite bid of an AP with a single reachable client: it bids
    ``max(benefit, current price) + max_price_increment``.  The increment
    defaults to the instance's largest benefit plus epsilon and is never
    smaller than epsilon.
    """

    epsilon: Fraction | float | int | str | None = None
    max_iterations: int | None = None
    tie_break: str = "lowest_index"
    max_price_increment: Fraction | float | int | str | None = None

    def __post_init__(self):
        if self.tie_break != "lowest_index":
            raise ConfigurationError(f"unsupported tie-break rule {self.tie_break!r}")
        if self.epsilon is not None and not as_fraction(self.epsilon) > 0:
            raise ConfigurationError("epsilon must be positive")
        if self.max_price_increment is not None and not as_fraction(self.max_price_increment) > 0:
            raise ConfigurationError("max_price_increment must be positive")

    def resolved_epsilon(self, m: int) -> Fraction:
        if self.epsilon is None:
            return Fraction(1, m + 1)
        return as_fraction(self.epsilon)


@dataclass(frozen=True)
class TraceEvent:
    """One auction iteration.

    Forward: ``actor`` is the bidding AP, ``target`` the client it wins,
    ``bid`` the client's new price, ``delta`` the price increase and
    ``evicted`` the AP that lost the client.  Reverse: ``actor`` is the
    bidding client, ``target`` the AP, ``bid`` the AP's new profit, ``delta``
    the profit increase and ``evicted`` the client pushed out.
    """

    phase: str
    iteration: int
    actor: int
    target: int
    bid: Fraction
    delta: Fraction
    evicted: int | None

    def line(self) -> str:
        ev = "" if self.evicted is None else str(self.evicted)
        return f"{self.phase},{self.iteration},{self.actor},{self.target},{self.bid},{self.delta},{ev}"


StepCallback = Callable[[TraceEvent, Assignment, PriceState], None]


@dataclass
class CSReport:
    violations_a: list[tuple[int, int]] = field(default_factory=list)
    violations_b: list[tuple[int, int]] = field(default_factory=list)
    violations_c: list[int] = field(default_factory=list)

    @property
    def cs_a(self) -> bool:
        return not self.violations_a

    @property
    def cs_b(self) -> bool:
        return not self.violations_b

    @property
    def cs_c(self) -> bool:
        return not self.violations_c

    @property
    def passed(self) -> bool:
        return self.cs_a and self.cs_b and self.cs_c

    def certificate(self) -> Certificate:
        return Certificate(self.cs_a, self.cs_b, self.cs_c)


def check_epsilon_cs(instance: Instance, s: Assignment, prices: PriceState, epsilon) -> CSReport:
    """Check the three epsilon-CS conditions; violations are reported, not raised."""
    if len(prices.pi) != instance.m or len(prices.p) != instance.n:
        raise ValueError("price vectors do not match the instance dimensions")
    pi, p = prices.pi, prices.p
    b = instance.benefit
    report = CSReport()
    for i, j in instance.pairs():
        if pi[i] + p[j] < int(b[i, j]) - epsilon:
            report.violations_a.append((i, j))
    for i, j in sorted(s.pairs):
        if pi[i] + p[j] != int(b[i, j]):
            report.violations_b.append((i, j))
    top = max(pi)
    for i, count in enumerate(s.load()):
        if count >= 2 and pi[i] != top:
            report.violations_c.append(i)
    return report


def dual_objective(instance: Instance, prices: PriceState) -> Fraction:
    lam = prices.lambda_price if prices.lambda_price is not None else max(prices.pi)
    return sum(prices.pi, Fraction(0)) + sum(prices.p, Fraction(0)) + (instance.n - instance.m) * lam


def default_max_iterations(instance: Instance, epsilon) -> int:
    """Per-phase iteration budget: ``10 n max_benefit / epsilon`` plus slack."""
    eps = as_fraction(epsilon)
    maxb = max(instance.max_benefit, 1)
    return math.floor(10 * instance.n * maxb / eps) + 10 * (instance.m + instance.n)


class _Market:
    """Mutable integer-scaled auction state shared by both phases."""

    def __init__(self, instance: Instance, config: AuctionConfig, start=None):
        self.instance = instance
        self.config = config
        m, n = instance.m, instance.n
        eps = config.resolved_epsilon(m)
        self.epsilon = eps

        if start is None:
            assignment, prices = Assignment.empty(m, n), PriceState.zeros(m, n)
        else:
            assignment, prices = start
        if assignment.n != n or assignment.m != m:
            raise ValueError("start assignment does not match the instance")
        if not assignment.respects(instance):
            raise ValueError("start assignment uses pairs outside the adjacency")

        denoms = [eps.denominator] + [Fraction(v).denominator for v in (*prices.pi, *prices.p)]
        if prices.lambda_price is not None:
            denoms.append(Fraction(prices.lambda_price).denominator)
        inc = None if config.max_price_increment is None else as_fraction(config.max_price_increment)
        q = math.lcm(*denoms)
        self.q = q
        self.e = int(eps * q)

        rows = instance.benefit.tolist()
        self.B = [[v * q for v in row] for row in rows]
        self.A = [list(a) for a in instance.adjacency_A]
        self.Bset = [list(bj) for bj in instance.adjacency_B]
        maxb = max(instance.max_benefit, 1) * q
        self.inc = maxb + self.e if inc is None else max(math.ceil(inc * q), self.e)

        if config.max_iterations is not None:
            self.max_iterations = config.max_iterations
        else:
            self.max_iterations = default_max_iterations(instance, eps)

        self.p = [int(v * q) for v in prices.p]
        self.pi: list[int | None] = [int(v * q) for v in prices.pi]
        self.lam = None if prices.lambda_price is None else int(prices.lambda_price * q)
        self.owner: list[int | None] = list(assignment.client_of)
        self.members: list[set[int]] = [set() for _ in range(m)]
        for j, i in enumerate(self.owner):
            if i is not None:
                self.members[i].add(j)

        self.iterations_fwd = 0
        self.iterations_rev = 0
        self.bids_fwd = [0] * m
        self.bids_rev = [0] * m

    # -- conversions -------------------------------------------------------

    def _frac(self, v: int) -> Fraction:
        return Fraction(v, self.q)

    def _profit_on_demand(self, i: int) -> int:
        return max(self.B[i][j] - self.p[j] for j in self.A[i])

    def snapshot(self) -> tuple[Assignment, PriceState]:
        pi = [v if v is not None else self._profit_on_demand(i) for i, v in enumerate(self.pi)]
        prices = PriceState(
            tuple(self._frac(v) for v in pi),
            tuple(self._frac(v) for v in self.p),
            None if self.lam is None else self._frac(self.lam),
        )
        return Assignment(tuple(self.owner), self.instance.m), prices

    # -- forward phase -----------------------------------------------------

    def forward(self, on_step: Optional[StepCallback] = None) -> None:
        B, A, p, e = self.B, self.A, self.p, self.e
        for i, mem in enumerate(self.members):
            if len(mem) > 1:
                raise ValueError(f"forward auction needs at most one client per AP; AP {i} has {len(mem)}")
        # an assigned AP's profit is fixed by equality on its pair
        for i, mem in enumerate(self.members):
            if mem:
                (j,) = mem
                self.pi[i] = B[i][j] - p[j]
            else:
                self.pi[i] = None
        heap = [i for i in range(self.instance.m) if not self.members[i]]
        heapq.heapify(heap)
        while heap:
            if self.iterations_fwd >= self.max_iterations:
                raise NonTerminationError(f"forward auction exceeded {self.max_iterations} iterations")
            self.iterations_fwd += 1
            i = heapq.heappop(heap)
            Bi = B[i]
            best_j = -1
            u = w = None
            for j in A[i]:
                v = Bi[j] - p[j]
                if u is None or v > u:
                    w, u, best_j = u, v, j
                elif w is None or v > w:
                    w = v
            j = best_j
            if w is None:
                # lone candidate: outbid the current price by the increment, never lower it
                bid = max(Bi[j], p[j]) + self.inc
                w = Bi[j] - bid + e
            else:
                bid = Bi[j] - w + e
            raise_by = bid - p[j]
            p[j] = bid
            prev = self.owner[j]
            if prev is not None:
                self.members[prev].discard(j)
                self.pi[prev] = None
                heapq.heappush(heap, prev)
            self.owner[j] = i
            self.members[i].add(j)
            self.pi[i] = w - e
            self.bids_fwd[i] += 1
            if on_step is not None:
                ev = TraceEvent("forward", self.iterations_fwd, i, j, self._frac(bid), self._frac(raise_by), prev)
                on_step(ev, *self.snapshot())

    # -- reverse phase -----------------------------------------------------

    def reverse(self, on_step: Optional[StepCallback] = None) -> None:
        B, Bset, p, pi, e = self.B, self.Bset, self.p, self.pi, self.e
        for i, mem in enumerate(self.members):
            if not mem:
                raise ValueError(f"reverse auction needs every AP to hold a client; AP {i} has none")
        if any(v is None for v in pi):
            raise ValueError("reverse auction needs a profit for every AP")
        if self.lam is None:
            self.lam = max(pi)
        lam = self.lam
        if any(v > lam for v in pi):
            raise ValueError("AP profit above lambda_price")
        heap = [j for j, i in enumerate(self.owner) if i is None]
        heapq.heapify(heap)
        while heap:
            if self.iterations_rev >= self.max_iterations:
                raise NonTerminationError(f"reverse auction exceeded {self.max_iterations} iterations")
            self.iterations_rev += 1
            j = heapq.heappop(heap)
            best_i = -1
            beta = omega = None
            for i in Bset[j]:
                v = B[i][j] - pi[i]
                if beta is None or v > beta:
                    omega, beta, best_i = beta, v, i
                elif omega is None or v > omega:
                    omega = v
            i = best_i
            delta = lam - pi[i]
            if omega is not None:
                delta = min(delta, beta - omega + e)
            p[j] = beta - delta
            pi[i] += delta
            if not (delta >= e or pi[i] == lam):
                raise AssertionError(f"reverse bid on AP {i} raised profit by less than epsilon below the cap")
            evicted = None
            if delta > 0:
                if len(self.members[i]) != 1:
                    raise AssertionError(f"eviction from AP {i} holding {len(self.members[i])} clients")
                (evicted,) = self.members[i]
                self.members[i].clear()
                self.owner[evicted] = None
                heapq.heappush(heap, evicted)
            self.members[i].add(j)
            self.owner[j] = i
            self.bids_rev[i] += 1
            if on_step is not None:
                ev = TraceEvent("reverse", self.iterations_rev, j, i, self._frac(pi[i]), self._frac(delta), evicted)
                on_step(ev, *self.snapshot())


def forward_auction(
    instance: Instance,
    config: AuctionConfig | None = None,
    start: tuple[Assignment, PriceState] | None = None,
    on_step: Optional[StepCallback] = None,
) -> tuple[Assignment, PriceState]:
    """Run the forward phase until every AP holds exactly one client."""
    market = _Market(instance, config or AuctionConfig(), start)
    market.forward(on_step)
    return market.snapshot()


def reverse_auction(
    instance: Instance,
    config: AuctionConfig | None = None,
    start: tuple[Assignment, PriceState] | None = None,
    on_step: Optional[StepCallback] = None,
) -> tuple[Assignment, PriceState]:
    """Assign the leftover clients; ``start`` is normally the forward result.

    If ``start`` carries no ``lambda_price`` it is frozen at ``max(pi)``.
    """
    if start is None:
        raise ValueError("reverse auction needs a starting assignment and prices")
    market = _Market(instance, config or AuctionConfig(), start)
    market.reverse(on_step)
    return market.snapshot()


def solve(
    instance: Instance,
    config: AuctionConfig | None = None,
    *,
    certify: bool = True,
    on_step: Optional[StepCallback] = None,
) -> tuple[Assignment, PriceState, RunRecord]:
    """Forward phase, then reverse phase, then the epsilon-CS certificate.

    With ``certify`` the optimality precondition ``epsilon < 1/m`` is enforced
    up front.
    """
    config = config or AuctionConfig()
    eps = config.resolved_epsilon(instance.m)
    if certify and not eps < Fraction(1, instance.m):
        raise ConfigurationError(f"epsilon={eps} must be below 1/m = 1/{instance.m} for a certified run")
    if not instance.is_coverable():
        raise InfeasibleInstanceError("no assignment gives every AP a client")

    t0 = time.perf_counter()
    market = _Market(instance, config)
    market.forward(on_step)
    market.reverse(on_step)
    wall_ms = (time.perf_counter() - t0) * 1e3

    assignment, prices = market.snapshot()
    report = check_epsilon_cs(instance, assignment, prices, eps)
    record = RunRecord(
        method="auction",
        m=instance.m,
        n=instance.n,
        total_benefit_scaled=total_benefit(instance, assignment),
        scale_k=instance.scale_k,
        epsilon=eps,
        iterations_fwd=market.iterations_fwd,
        iterations_rev=market.iterations_rev,
        bids_total=sum(market.bids_fwd) + sum(market.bids_rev),
        bids_fwd_per_ap=list(market.bids_fwd),
        bids_rev_per_ap=list(market.bids_rev),
        wall_time_ms=wall_ms,
        certificate=report.certificate(),
        feasible=assignment.is_feasible,
    )
    return assignment, prices, record
