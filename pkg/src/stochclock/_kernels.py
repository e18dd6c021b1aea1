"""Inner loops for game, renewal and walk simulation.

Each kernel is written once as plain Python over numpy arrays and compiled
with numba when acceleration is on. Kernels consume pre-drawn uniforms in
blocks and keep their running state in a small int64 array, so a caller can
resume a trajectory block after block without the block size changing the
result.
"""
import numpy as np

from ._jit import maybe_njit

# game state slots
G_XA = 0  # absolute position of A: initial position + snapped progress
G_XB = 1
G_ROUND = 2
G_HALT = 3
G_SCORE = 4
G_QMIN = 5
G_QMAX = 6
G_LIVE_QMIN = 7
G_LIVE_QMAX = 8
G_TIES = 9
G_QHALT = 10
G_NSLOTS = 11

HALT_NONE = 0
HALT_VIOLATION = 1
HALT_CAP = 2

OWNER_A = 0
OWNER_B = 1

# renewal state slots
R_X = 0
R_SINCE = 1
R_NSLOTS = 2

# walk state slots
W_Z = 0
W_STEPS = 1
W_DONE = 2
W_NSLOTS = 3


def _sample_offset(cdf, u):
    # half-open intervals [cdf[k-1], cdf[k]); the last slot absorbs rounding
    k = 0
    last = cdf.shape[0] - 1
    while k < last and u >= cdf[k]:
        k += 1
    return k


sample_offset = maybe_njit(_sample_offset)


def _game_block(cdf_a, cdf_b, d, snap, sign, cap, u, state, ticks):
    """Advance one game over the rows of ``u``; return the tick records written."""
    record = ticks.shape[0] > 0
    leader = OWNER_A if sign > 0 else OWNER_B
    follower = OWNER_B if sign > 0 else OWNER_A
    nt = 0
    for i in range(u.shape[0]):
        if state[G_HALT] != HALT_NONE:
            break
        n = state[G_ROUND] + 1
        state[G_ROUND] = n
        xa0 = state[G_XA]
        xb0 = state[G_XB]
        ta0 = xa0 // d
        tb0 = xb0 // d
        xa = xa0 + sample_offset(cdf_a, u[i, 0])
        xb = xb0 + sample_offset(cdf_b, u[i, 1])
        ta = xa // d
        tb = xb // d
        tick_a = ta > ta0
        tick_b = tb > tb0
        if snap:
            if tick_a:
                xa = ta * d
            if tick_b:
                xb = tb * d
        state[G_XA] = xa
        state[G_XB] = xb

        q = sign * (xa - xb)
        if q < state[G_QMIN]:
            state[G_QMIN] = q
        if q > state[G_QMAX]:
            state[G_QMAX] = q

        if sign > 0:
            tl0 = ta0
            tf0 = tb0
            tl = ta
            tf = tb
            tick_l = tick_a
            tick_f = tick_b
        else:
            tl0 = tb0
            tf0 = ta0
            tl = tb
            tf = ta
            tick_l = tick_b
            tick_f = tick_a

        if tick_l and tick_f:
            state[G_TIES] += 1
        if record:
            # the expected owner of a simultaneous pair is consumed first
            if tl0 == tf0:
                if tick_l:
                    ticks[nt, 0] = leader
                    ticks[nt, 1] = n
                    nt += 1
                if tick_f:
                    ticks[nt, 0] = follower
                    ticks[nt, 1] = n
                    nt += 1
            else:
                if tick_f:
                    ticks[nt, 0] = follower
                    ticks[nt, 1] = n
                    nt += 1
                if tick_l:
                    ticks[nt, 0] = leader
                    ticks[nt, 1] = n
                    nt += 1

        gap = tl - tf
        if gap < 0 or gap > 1:
            state[G_HALT] = HALT_VIOLATION
            state[G_SCORE] = min(tl0, tf0)
            state[G_QHALT] = q
            break

        if q < state[G_LIVE_QMIN]:
            state[G_LIVE_QMIN] = q
        if q > state[G_LIVE_QMAX]:
            state[G_LIVE_QMAX] = q
        state[G_SCORE] = min(tl, tf)
        if n >= cap:
            state[G_HALT] = HALT_CAP
            state[G_QHALT] = q
            break
    return nt


def _renewal_block(cdf, d, snap, u, state, out, filled):
    """Record inter-tick application counts into ``out[filled:]``.

    Returns ``(uniforms_used, filled)``.
    """
    x = state[R_X]
    since = state[R_SINCE]
    used = 0
    for i in range(u.shape[0]):
        if filled >= out.shape[0]:
            break
        used += 1
        x0 = x
        x = x0 + sample_offset(cdf, u[i])
        since += 1
        t = x // d
        if t > x0 // d:
            if snap:
                x = t * d
            out[filled] = since
            filled += 1
            since = 0
    state[R_X] = x
    state[R_SINCE] = since
    return used, filled


def _walk_block(cdf, m, lower, upper, u, state):
    """Run the increment walk until it leaves ``(lower, upper)``."""
    z = state[W_Z]
    steps = state[W_STEPS]
    for i in range(u.shape[0]):
        if z <= lower or z >= upper:
            state[W_DONE] = 1
            break
        z += sample_offset(cdf, u[i]) - m
        steps += 1
    if z <= lower or z >= upper:
        state[W_DONE] = 1
    state[W_Z] = z
    state[W_STEPS] = steps


game_block = maybe_njit(_game_block)
renewal_block = maybe_njit(_renewal_block)
walk_block = maybe_njit(_walk_block)


def new_game_state(x_a, x_b, q0):
    state = np.zeros(G_NSLOTS, dtype=np.int64)
    state[G_XA] = x_a
    state[G_XB] = x_b
    state[G_QMIN] = q0
    state[G_QMAX] = q0
    state[G_LIVE_QMIN] = q0
    state[G_LIVE_QMAX] = q0
    state[G_QHALT] = q0
    return state
