"""Gas-like market driven by the Logistic Bimap.

Each transaction advances the map one step, turns the new point into an
ordered pair of agents ``(i, j)``, draws a uniform fraction ``upsilon`` and
moves ``upsilon * (m_i + m_j) / 2`` from ``i`` (loser) to ``j`` (winner)
unless ``i`` cannot afford it.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numba
import numpy as np

from .chaos import ChaoticState, MapParams, MapRangeError, advance

log = logging.getLogger(__name__)

RNG_ALGORITHM = f"numpy.random.Generator(PCG64).random float64 [0,1), numpy {np.__version__}"
CONSERVATION_RTOL = 1e-9
_CHUNK = 1 << 20


class ConservationError(RuntimeError):
    pass


@dataclass(frozen=True)
class MarketConfig:
    n_agents: int
    initial_money: float

    def __post_init__(self):
        if int(self.n_agents) != self.n_agents or self.n_agents < 2:
            raise ValueError(f"n_agents must be an integer >= 2, got {self.n_agents!r}")
        if not (math.isfinite(self.initial_money) and self.initial_money > 0):
            raise ValueError(f"initial_money must be positive, got {self.initial_money!r}")

    @property
    def total_money(self) -> float:
        return self.n_agents * self.initial_money


@dataclass
class Ledger:
    balances: np.ndarray

    @classmethod
    def uniform(cls, market: MarketConfig) -> "Ledger":
        return cls(np.full(market.n_agents, float(market.initial_money)))

    def total(self) -> float:
        return math.fsum(self.balances)

    def __len__(self):
        return len(self.balances)


@dataclass(frozen=True)
class AgentPair:
    i: int
    j: int


@dataclass(frozen=True)
class TradeRecord:
    t: int
    pair: AgentPair
    upsilon: float
    delta_m: float
    executed: bool


@dataclass
class AgentActivity:
    times_i: np.ndarray
    times_j: np.ndarray
    executed_as_i: np.ndarray
    executed_as_j: np.ndarray

    @classmethod
    def zeros(cls, n: int) -> "AgentActivity":
        return cls(*(np.zeros(n, dtype=np.int64) for _ in range(4)))

    def __len__(self):
        return len(self.times_i)


@dataclass
class RunSummary:
    total_steps: int
    executed: int = 0
    skipped_insufficient: int = 0
    skipped_self: int = 0
    final_state: ChaoticState | None = None
    conservation_error: float = 0.0
    rng_algorithm: str = RNG_ALGORITHM


@dataclass
class Trace:
    """Per-transaction records of a run, column-wise."""

    i: np.ndarray
    j: np.ndarray
    upsilon: np.ndarray
    delta_m: np.ndarray
    executed: np.ndarray

    def records(self):
        for t in range(len(self.i)):
            yield TradeRecord(
                t + 1,
                AgentPair(int(self.i[t]), int(self.j[t])),
                float(self.upsilon[t]),
                float(self.delta_m[t]),
                bool(self.executed[t]),
            )


@dataclass
class SimulationResult:
    ledger: Ledger
    activity: AgentActivity
    summary: RunSummary
    trace: Trace | None = field(default=None, repr=False)


def select_agents(state: ChaoticState, n_agents: int) -> AgentPair:
    i = min(int(state.x * n_agents), n_agents - 1)
    j = min(int(state.y * n_agents), n_agents - 1)
    return AgentPair(i, j)


def make_rng(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(seed))


def draw_fraction(rng: np.random.Generator) -> float:
    return float(rng.random())


def apply_trade(ledger: Ledger, pair: AgentPair, upsilon: float, t: int) -> TradeRecord:
    n = len(ledger)
    if not (0 <= pair.i < n and 0 <= pair.j < n):
        raise IndexError(f"agent pair {pair} out of range for {n} agents")
    if not (0.0 <= upsilon <= 1.0):
        raise ValueError(f"upsilon must lie in [0, 1], got {upsilon!r}")
    b = ledger.balances
    delta = upsilon * (b[pair.i] + b[pair.j]) / 2.0
    if pair.i == pair.j or b[pair.i] < delta:
        return TradeRecord(t, pair, upsilon, float(delta), False)
    b[pair.i] -= delta
    b[pair.j] += delta
    return TradeRecord(t, pair, upsilon, float(delta), True)


@numba.njit(cache=True)
def _market_kernel(x, y, lambda_a, lambda_b, n, bal, ups,
                   times_i, times_j, exec_i, exec_j, counts,
                   trace_on, tr_i, tr_j, tr_dm, tr_ex):
    # counts: [executed, skipped_insufficient, skipped_self, bad_step (or -1)]
    for t in range(ups.shape[0]):
        nx = lambda_a * (3.0 * y + 1.0) * x * (1.0 - x)
        ny = lambda_b * (3.0 * x + 1.0) * y * (1.0 - y)
        x = nx
        y = ny
        if not (0.0 <= x <= 1.0 and 0.0 <= y <= 1.0):
            counts[3] = t
            return x, y
        i = int(x * n)
        j = int(y * n)
        if i >= n:
            i = n - 1
        if j >= n:
            j = n - 1
        times_i[i] += 1
        times_j[j] += 1
        delta = ups[t] * (bal[i] + bal[j]) / 2.0
        done = False
        if i == j:
            counts[2] += 1
        elif bal[i] < delta:
            counts[1] += 1
        else:
            bal[i] -= delta
            bal[j] += delta
            exec_i[i] += 1
            exec_j[j] += 1
            counts[0] += 1
            done = True
        if trace_on:
            tr_i[t] = i
            tr_j[t] = j
            tr_dm[t] = delta
            tr_ex[t] = done
    return x, y


def run_simulation(
    market: MarketConfig,
    params: MapParams,
    start: ChaoticState,
    discard: int,
    total_steps: int,
    seed: int,
    *,
    fractions: np.ndarray | None = None,
    trace: bool = False,
) -> SimulationResult:
    """Run ``total_steps`` chaotic transactions on a fresh uniform ledger.

    Every map step counts as a transaction whether or not money moved.
    ``fractions`` replaces the seeded generator with an explicit sequence of
    upsilon values (one per step).
    """
    if total_steps < 1:
        raise ValueError("total_steps must be >= 1")
    if not params.in_chaotic_window:
        log.warning("map parameters %s lie outside the chaotic window", params)
    if fractions is not None:
        fractions = np.asarray(fractions, dtype=np.float64)
        if fractions.shape != (total_steps,):
            raise ValueError("fractions must supply exactly one value per step")
        if fractions.size and not (fractions.min() >= 0.0 and fractions.max() <= 1.0):
            raise ValueError("fractions must lie in [0, 1]")

    n = market.n_agents
    ledger = Ledger.uniform(market)
    activity = AgentActivity.zeros(n)
    summary = RunSummary(total_steps)
    counts = np.array([0, 0, 0, -1], dtype=np.int64)
    rng = make_rng(seed)

    state = advance(start, params, discard)
    x, y = state.x, state.y

    tr = Trace(
        np.zeros(total_steps if trace else 0, dtype=np.int64),
        np.zeros(total_steps if trace else 0, dtype=np.int64),
        np.zeros(total_steps if trace else 0, dtype=np.float64),
        np.zeros(total_steps if trace else 0, dtype=np.float64),
        np.zeros(total_steps if trace else 0, dtype=np.bool_),
    )
    empty_i = np.zeros(0, dtype=np.int64)
    empty_f = np.zeros(0, dtype=np.float64)
    empty_b = np.zeros(0, dtype=np.bool_)

    done = 0
    while done < total_steps:
        size = min(_CHUNK, total_steps - done)
        if fractions is None:
            ups = rng.random(size)
        else:
            ups = fractions[done:done + size]
        if trace:
            tr.upsilon[done:done + size] = ups
            views = (tr.i[done:done + size], tr.j[done:done + size],
                     tr.delta_m[done:done + size], tr.executed[done:done + size])
        else:
            views = (empty_i, empty_i, empty_f, empty_b)
        x, y = _market_kernel(
            x, y, params.lambda_a, params.lambda_b, n, ledger.balances, ups,
            activity.times_i, activity.times_j, activity.executed_as_i, activity.executed_as_j,
            counts, trace, *views,
        )
        if counts[3] >= 0:
            raise MapRangeError(f"map left the unit square at transaction {done + counts[3] + 1}")
        done += size
        _check_ledger(ledger, market, done)

    summary.executed, summary.skipped_insufficient, summary.skipped_self = (int(c) for c in counts[:3])
    summary.final_state = ChaoticState(x, y)
    summary.conservation_error = abs(ledger.total() - market.total_money) / market.total_money
    return SimulationResult(ledger, activity, summary, tr if trace else None)


def _check_ledger(ledger: Ledger, market: MarketConfig, t: int):
    err = abs(ledger.total() - market.total_money) / market.total_money
    if err > CONSERVATION_RTOL:
        raise ConservationError(f"money not conserved after {t} transactions (rel. error {err:.3e})")
    if ledger.balances.min() < 0:
        raise ConservationError(f"negative balance after {t} transactions")


@dataclass(frozen=True)
class PassiveReport:
    passive: frozenset
    never_selected: int


def passive_agents(activity: AgentActivity) -> PassiveReport:
    """Agents that never moved money, plus the count never drawn at all."""
    moved = activity.executed_as_i + activity.executed_as_j
    drawn = activity.times_i + activity.times_j
    idx = np.flatnonzero(moved == 0)
    return PassiveReport(frozenset(int(k) for k in idx), int(np.count_nonzero(drawn == 0)))
