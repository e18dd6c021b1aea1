"""Stochastic reset clocks on a cycle of ``d`` positions.

A clock is a homogeneous Markov chain that jumps forward by ``k`` positions
with probability ``probs[k]`` on every application of its map. A tick is
emitted whenever the cumulative progress (plus the initial position) reaches
or passes a multiple of ``d``; under reset semantics any overshoot past that
multiple is discarded, so the clock restarts from position 0.
"""
from dataclasses import dataclass, field, replace

import numpy as np
from scipy.linalg import solve_banded

from . import _kernels

PROB_ATOL = 1e-12


@dataclass(frozen=True, eq=False)
class JumpDistribution:
    """Forward jump offsets ``0..d`` of a homogeneous clock.

    ``probs`` is padded with zeros to length ``d + 1``.
    """

    d: int
    probs: np.ndarray

    def __post_init__(self):
        d = int(self.d)
        if d < 1:
            raise ValueError(f"cycle length must be positive, got {self.d}")
        p = np.asarray(self.probs, dtype=float).ravel()
        if p.size == 0 or p.size > d + 1:
            raise ValueError(f"need between 1 and d+1={d + 1} offset probabilities, got {p.size}")
        if not np.all(np.isfinite(p)) or np.any(p < 0.0) or np.any(p > 1.0):
            raise ValueError("offset probabilities must lie in [0, 1]")
        if abs(p.sum() - 1.0) > PROB_ATOL:
            raise ValueError(f"offset probabilities sum to {p.sum()!r}, not 1")
        full = np.zeros(d + 1)
        full[: p.size] = p
        full.flags.writeable = False
        object.__setattr__(self, "d", d)
        object.__setattr__(self, "probs", full)

    def __eq__(self, other):
        if not isinstance(other, JumpDistribution):
            return NotImplemented
        return self.d == other.d and np.array_equal(self.probs, other.probs)

    def __hash__(self):
        return hash((self.d, self.probs.tobytes()))

    @property
    def max_offset(self):
        """Largest offset with positive probability."""
        return int(np.flatnonzero(self.probs > 0.0)[-1])

    @property
    def cdf(self):
        """Cumulative sums over offsets ``0..max_offset`` (sampling table)."""
        c = np.cumsum(self.probs[: self.max_offset + 1])
        return np.ascontiguousarray(c)

    def transition_matrix(self):
        """One-application transition matrix on positions ``0..d-1``.

        Jumps that reach or pass ``d`` land on 0 (reset).
        """
        d = self.d
        P = np.zeros((d, d))
        for j in range(d):
            for k, pk in enumerate(self.probs):
                if pk == 0.0:
                    continue
                target = j + k if j + k < d else 0
                P[j, target] += pk
        return P


@dataclass(frozen=True)
class StochasticClock:
    jumps: JumpDistribution
    initial_position: int = 0

    def __post_init__(self):
        j = int(self.initial_position)
        if not 0 <= j < self.jumps.d:
            raise ValueError(f"initial position {j} outside 0..{self.jumps.d - 1}")
        object.__setattr__(self, "initial_position", j)

    @property
    def d(self):
        return self.jumps.d

    def started_at(self, position):
        return replace(self, initial_position=position)


@dataclass
class ClockRunState:
    position: int = 0
    progress: int = 0
    ticks_emitted: int = 0
    applications: int = 0
    tick_log: list = field(default_factory=list)


@dataclass(frozen=True)
class TickEvent:
    application_index: int
    tick_number: int


def make_clock(probs, d=None, initial_position=0):
    p = np.asarray(probs, dtype=float)
    if d is None:
        d = p.size - 1
    return StochasticClock(JumpDistribution(d, p), initial_position)


def make_ladder(d, delta):
    """Jump +1 with probability ``delta``, otherwise stay."""
    if not 0.0 <= delta <= 1.0:
        raise ValueError(f"delta must lie in [0, 1], got {delta}")
    if d < 1:
        raise ValueError(f"d must be positive, got {d}")
    probs = np.zeros(d + 1)
    probs[0] = 1.0 - delta
    probs[1] += delta
    return StochasticClock(JumpDistribution(d, probs), 0)


def make_perfect(d):
    return make_ladder(d, 1.0)


def start(clock):
    """Fresh run state for ``clock``."""
    return ClockRunState(position=clock.initial_position)


def step(clock, state, randomness, reset=True):
    """Apply the clock map once.

    The offset is drawn by inverse CDF from ``randomness`` in ``[0, 1)``.
    Returns ``(new_state, ticked)``; ``state`` is left untouched. With
    ``reset=False`` the overshoot is kept (plain modular motion).
    """
    d = clock.d
    j = clock.initial_position
    k = int(_kernels._sample_offset(clock.jumps.cdf, randomness))
    before = state.progress + j
    after = before + k
    ticked = after // d > before // d
    if ticked and reset:
        after = (after // d) * d
    progress = after - j
    n = state.applications + 1
    new = ClockRunState(
        position=after % d,
        progress=progress,
        ticks_emitted=state.ticks_emitted + int(ticked),
        applications=n,
        tick_log=state.tick_log + [TickEvent(n, state.ticks_emitted + 1)] if ticked else state.tick_log,
    )
    return new, bool(ticked)


def epsilon_continuity(clock):
    """Diamond-norm distance of one application to the identity: ``1 - p[0]``."""
    return 1.0 - float(clock.jumps.probs[0])


def expected_jumps_per_tick_exact(clock):
    """Expected applications between consecutive ticks, started from position 0.

    Solves ``E_j = 1 + sum_k p[k] E_{j+k}`` with ``E = 0`` once ``j + k >= d``.
    The system is upper triangular with bandwidth ``max_offset``.
    """
    p = clock.jumps.probs
    if p[0] == 1.0:
        return float("inf")
    d = clock.d
    m = clock.jumps.max_offset
    # row j: (1 - p0) E_j - sum_{k>=1, j+k<d} p_k E_{j+k} = 1
    ab = np.zeros((m + 1, d))
    ab[m, :] = 1.0 - p[0]
    for k in range(1, m + 1):
        ab[m - k, k:] = -p[k]
    E = solve_banded((0, m), ab, np.ones(d))
    return float(E[0])


def simulate_intertick(clock, n_ticks, rng, reset=True, block=1 << 16):
    """Inter-tick application counts of one long run, from position 0."""
    out = np.zeros(n_ticks, dtype=np.int64)
    if clock.jumps.probs[0] == 1.0:
        raise ValueError("identity clock never ticks")
    state = np.zeros(_kernels.R_NSLOTS, dtype=np.int64)
    cdf = clock.jumps.cdf
    filled = 0
    while filled < n_ticks:
        u = rng.random(block)
        _, filled = _kernels.renewal_block(cdf, clock.d, reset, u, state, out, filled)
    return out
