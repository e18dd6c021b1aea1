"""The Alternate Ticks Game between two stochastic clocks.

Both clocks are applied once per round. The player that starts ahead on the
circle (A when ``z0 >= 0``) is the agreed leader and must tick first; from
then on the ticks have to alternate. The game halts at the first tick that
breaks alternation or when the round cap is reached.

All walk values reported here are oriented from the leader:
``q = leader position - follower position`` (absolute, snapped progress), so
the halting boundaries read the same for either sign of ``z0``.
"""
from dataclasses import dataclass, field

import numpy as np

from . import _kernels
from .clock import StochasticClock, expected_jumps_per_tick_exact

DEFAULT_CAP = 10_000_000
BLOCK_ROUNDS = 1 << 14
FIRST_BLOCK = 1 << 8


@dataclass(frozen=True)
class GameConfig:
    clock_a: StochasticClock
    clock_b: StochasticClock
    z0: int = 0
    application_cap: int = DEFAULT_CAP
    seed: int = 0
    runs: int = 1
    reset: bool = True

    def __post_init__(self):
        if self.clock_a.d != self.clock_b.d:
            raise ValueError(f"clock dimensions differ: {self.clock_a.d} != {self.clock_b.d}")
        if not abs(self.z0) < self.d:
            raise ValueError(f"|z0| must be below d={self.d}, got {self.z0}")
        if self.application_cap < 1:
            raise ValueError("application_cap must be at least 1")
        if self.runs < 1:
            raise ValueError("runs must be at least 1")
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must be a 64-bit unsigned integer")

    @property
    def d(self):
        return self.clock_a.d

    @property
    def leader(self):
        return "A" if self.z0 >= 0 else "B"

    def initial_positions(self):
        """``(j_A, j_B)`` with ``j_A - j_B = z0``."""
        return max(self.z0, 0), max(-self.z0, 0)


@dataclass
class GameTranscript:
    ticks: np.ndarray  # (n, 2): owner (0 = A, 1 = B), round index
    halt_reason: str  # "violation" or "cap_reached"
    score: int
    applications_used: int
    q_min: int
    q_max: int
    live_q_min: int
    live_q_max: int
    q_at_halt: int
    ties: int
    ticks_a: int
    ticks_b: int
    d: int
    leader: str = "A"

    @property
    def owners(self):
        return ["A" if o == _kernels.OWNER_A else "B" for o in self.ticks[:, 0]]


@dataclass(frozen=True)
class ScoreEstimate:
    mean: float
    std_error: float
    runs: int
    capped_runs: int
    mean_applications: float = float("nan")
    applications_std_error: float = float("nan")
    ties: int = 0
    scores: np.ndarray = field(default=None, repr=False, compare=False)
    applications: np.ndarray = field(default=None, repr=False, compare=False)


@dataclass(frozen=True)
class BoundaryReport:
    necessary_touched: bool
    sufficient_touched: bool
    necessary_ok: bool
    sufficient_ok: bool
    counterexample: object = None

    @property
    def ok(self):
        return self.necessary_ok and self.sufficient_ok


def run_rng(seed, run_index):
    """Independent generator for one run, a pure function of ``(seed, run_index)``."""
    ss = np.random.SeedSequence(entropy=int(seed), spawn_key=(int(run_index),))
    return np.random.Generator(np.random.PCG64(ss))


def _play(config, run_index, record_ticks):
    d = config.d
    j_a, j_b = config.initial_positions()
    sign = 1 if config.z0 >= 0 else -1
    cdf_a = config.clock_a.jumps.cdf
    cdf_b = config.clock_b.jumps.cdf
    state = _kernels.new_game_state(j_a, j_b, abs(config.z0))
    rng = run_rng(config.seed, run_index)
    buf = np.zeros((2 * BLOCK_ROUNDS if record_ticks else 0, 2), dtype=np.int64)
    chunks = []
    # consecutive draws continue one stream, so growing blocks leave the variates unchanged
    rounds = FIRST_BLOCK
    while state[_kernels.G_HALT] == _kernels.HALT_NONE:
        u = rng.random((rounds, 2))
        rounds = min(2 * rounds, BLOCK_ROUNDS)
        nt = _kernels.game_block(cdf_a, cdf_b, d, config.reset, sign, config.application_cap, u, state, buf)
        if nt:
            chunks.append(buf[:nt].copy())
    return state, chunks


def play_once(config, run_index=0, record_ticks=True):
    """Play one game; deterministic in ``(config.seed, run_index)``."""
    state, chunks = _play(config, run_index, record_ticks)
    ticks = np.concatenate(chunks) if chunks else np.zeros((0, 2), dtype=np.int64)
    d = config.d
    j_a, j_b = config.initial_positions()
    halted = state[_kernels.G_HALT]
    return GameTranscript(
        ticks=ticks,
        halt_reason="violation" if halted == _kernels.HALT_VIOLATION else "cap_reached",
        score=int(state[_kernels.G_SCORE]),
        applications_used=int(state[_kernels.G_ROUND]),
        q_min=int(state[_kernels.G_QMIN]),
        q_max=int(state[_kernels.G_QMAX]),
        live_q_min=int(state[_kernels.G_LIVE_QMIN]),
        live_q_max=int(state[_kernels.G_LIVE_QMAX]),
        q_at_halt=int(state[_kernels.G_QHALT]),
        ties=int(state[_kernels.G_TIES]),
        ticks_a=int(state[_kernels.G_XA] // d - j_a // d),
        ticks_b=int(state[_kernels.G_XB] // d - j_b // d),
        d=d,
        leader=config.leader,
    )


def estimate_score(config):
    """Mean and standard error of the score over ``config.runs`` games."""
    if config.runs < 2:
        raise ValueError("need at least two runs for a standard error")
    scores = np.empty(config.runs, dtype=np.int64)
    apps = np.empty(config.runs, dtype=np.int64)
    capped = 0
    ties = 0
    for i in range(config.runs):
        state, _ = _play(config, i, record_ticks=False)
        scores[i] = state[_kernels.G_SCORE]
        apps[i] = state[_kernels.G_ROUND]
        capped += int(state[_kernels.G_HALT] == _kernels.HALT_CAP)
        ties += int(state[_kernels.G_TIES])
    n = config.runs
    return ScoreEstimate(
        mean=float(scores.mean()),
        std_error=float(scores.std(ddof=1) / np.sqrt(n)),
        runs=n,
        capped_runs=capped,
        mean_applications=float(apps.mean()),
        applications_std_error=float(apps.std(ddof=1) / np.sqrt(n)),
        ties=ties,
        scores=scores,
        applications=apps,
    )


def renewal_estimate(estimate, clock):
    """Ticks per clock implied by the mean game length, ``E(S) / E(Y)``."""
    ey = expected_jumps_per_tick_exact(clock)
    return estimate.mean_applications / ey, estimate.applications_std_error / ey


def check_halting_boundaries(transcript, d=None):
    """Check a transcript against the necessary and sufficient halting boundaries.

    Necessary: a violation requires ``q > d`` or ``q < 0`` at or before the
    halting round. Sufficient: no round that the game survives has
    ``q > 2d`` or ``q < -d``.
    """
    d = transcript.d if d is None else d
    necessary_touched = transcript.q_max > d or transcript.q_min < 0
    sufficient_touched = transcript.q_max > 2 * d or transcript.q_min < -d
    necessary_ok = transcript.halt_reason != "violation" or necessary_touched
    sufficient_ok = transcript.live_q_max <= 2 * d and transcript.live_q_min >= -d
    bad = None if (necessary_ok and sufficient_ok) else transcript
    return BoundaryReport(necessary_touched, sufficient_touched, necessary_ok, sufficient_ok, bad)
