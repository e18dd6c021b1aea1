"""Stochastic reset clocks in the Alternate Ticks Game."""
from .clock import (
    ClockRunState,
    JumpDistribution,
    StochasticClock,
    TickEvent,
    epsilon_continuity,
    expected_jumps_per_tick_exact,
    make_clock,
    make_ladder,
    make_perfect,
    step,
)
from .game import GameConfig, GameTranscript, ScoreEstimate, check_halting_boundaries, estimate_score, play_once
from .walk import (
    AbsorptionProblem,
    BoundReport,
    DeltaDistribution,
    bound_eq5,
    closed_form_D,
    delta_distribution,
    perfect_vs_ladder_bounds,
    solve_expected_absorption,
    theorem1_bounds,
    theorem2_bounds,
)

__version__ = "0.1.0"
