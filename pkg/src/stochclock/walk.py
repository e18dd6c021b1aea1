"""Exact analysis of the relative-position walk between two clocks.

The walk ``Q`` moves by ``offset_A - offset_B`` each round. Expected
absorption times come from two independent routes: a banded linear solve of
the first-step recurrence (the oracle) and the quadratic closed form that
holds for symmetric increments. The walk ignores reset overshoot, which is
exact for ladder clocks only.
"""
from dataclasses import dataclass

import numpy as np
from scipy.linalg import solve_banded

from . import _kernels

PROB_ATOL = 1e-12

NECESSARY = "necessary"
SUFFICIENT = "sufficient"

VARIANTS = (
    "eq5_general",
    "theorem1",
    "theorem2_headline",
    "theorem2_appendix_exact",
    "perfect_vs_ladder",
)


@dataclass(frozen=True, eq=False)
class DeltaDistribution:
    """Law of one round's increment, on ``-m..m``.

    ``probs[k + m]`` is ``P(increment = k)``.
    """

    m: int
    probs: np.ndarray
    symmetric: bool = False

    def __post_init__(self):
        p = np.asarray(self.probs, dtype=float)
        if p.shape != (2 * self.m + 1,):
            raise ValueError(f"expected {2 * self.m + 1} probabilities for m={self.m}")
        if np.any(p < 0.0) or abs(p.sum() - 1.0) > PROB_ATOL:
            raise ValueError("increment probabilities must be non-negative and sum to 1")
        if self.symmetric and not np.allclose(p, p[::-1], rtol=0.0, atol=PROB_ATOL):
            raise ValueError("distribution flagged symmetric but p[k] != p[-k]")
        p = p.copy()
        p.flags.writeable = False
        object.__setattr__(self, "probs", p)

    @classmethod
    def from_mapping(cls, mapping, symmetric=None):
        m = max(abs(int(k)) for k in mapping)
        p = np.zeros(2 * m + 1)
        for k, v in mapping.items():
            p[int(k) + m] += v
        if symmetric is None:
            symmetric = bool(np.allclose(p, p[::-1], rtol=0.0, atol=PROB_ATOL))
        return cls(m, p, symmetric)

    @classmethod
    def symmetric_from_tail(cls, tail):
        """Build from ``P(|increment| = k) / 2`` for ``k = 1..m``; the rest sits at 0."""
        tail = np.asarray(tail, dtype=float)
        m = tail.size
        p = np.zeros(2 * m + 1)
        p[m + 1:] = tail
        p[:m] = tail[::-1]
        stay = 1.0 - 2.0 * tail.sum()
        p[m] = 0.0 if -PROB_ATOL < stay < 0.0 else stay
        return cls(m, p, True)

    def prob(self, k):
        return float(self.probs[k + self.m]) if abs(k) <= self.m else 0.0

    @property
    def offsets(self):
        return np.arange(-self.m, self.m + 1)

    @property
    def second_moment(self):
        """``sum_k k^2 p_k`` over both signs (twice the one-sided sum)."""
        return float(np.sum(self.offsets.astype(float) ** 2 * self.probs))

    @property
    def mean(self):
        return float(np.sum(self.offsets * self.probs))


@dataclass(frozen=True)
class AbsorptionProblem:
    delta: DeltaDistribution
    lower_boundary: int
    upper_boundary: int
    z: int

    def __post_init__(self):
        if not self.lower_boundary < self.upper_boundary:
            raise ValueError("lower boundary must lie below upper boundary")


@dataclass(frozen=True)
class BoundReport:
    d: int
    variant: str
    D_lower: float
    D_upper: float
    N_lower: float = float("nan")
    N_upper: float = float("nan")
    notes: str = ""


def delta_distribution(a, b):
    """Increment law of ``offset_a - offset_b`` for independent draws."""
    if a.d != b.d:
        raise ValueError(f"dimension mismatch: {a.d} != {b.d}")
    pa, pb = a.probs, b.probs
    # correlate: P(k) = sum_j pa[j + k] pb[j]
    full = np.correlate(pa, pb, mode="full")  # lags -d..d
    m = int(np.max(np.abs(np.flatnonzero(full > 0.0) - a.d))) if np.any(full > 0.0) else 0
    probs = full[a.d - m: a.d + m + 1]
    probs = probs / probs.sum()
    return DeltaDistribution(m, probs, symmetric=(a == b))


def boundaries(d, kind):
    if kind == NECESSARY:
        return -1, d + 1
    if kind == SUFFICIENT:
        return -d - 1, 2 * d + 1
    raise ValueError(f"unknown boundary pair {kind!r}")


def solve_absorption_profile(delta, lower, upper):
    """Expected steps to leave ``(lower, upper)`` from every interior start.

    Any state at or beyond a boundary is absorbing with value 0. Returns an
    array indexed by ``z - lower - 1``; ``inf`` where the walk cannot leave.
    """
    n = upper - lower - 1
    if n <= 0:
        return np.zeros(0)
    m = delta.m
    p = delta.probs
    if delta.prob(0) == 1.0:
        return np.full(n, np.inf)
    # row i: (1 - p_0) D_i - sum_{k != 0} p_k D_{i+k} = 1, band width m
    ab = np.zeros((2 * m + 1, n))
    for k in range(-m, m + 1):
        coef = (1.0 - p[m]) if k == 0 else -p[k + m]
        if coef == 0.0:
            continue
        row = m - k
        if k >= 0:
            ab[row, k:] = coef
        else:
            ab[row, : n + k] = coef
    try:
        return solve_banded((m, m), ab, np.ones(n))
    except np.linalg.LinAlgError:
        # e.g. a one-sided walk with no drift towards either boundary
        return np.full(n, np.inf)


def solve_expected_absorption(problem):
    """Expected number of rounds until the walk leaves the open interval."""
    lo, hi, z = problem.lower_boundary, problem.upper_boundary, problem.z
    if z <= lo or z >= hi:
        return 0.0
    return float(solve_absorption_profile(problem.delta, lo, hi)[z - lo - 1])


def recurrence_residual(delta, lower, upper, profile=None):
    """Largest ``|D_z - 1 - sum_k p_k D_{z+k}|`` over interior ``z``."""
    if profile is None:
        profile = solve_absorption_profile(delta, lower, upper)
    m = delta.m
    padded = np.concatenate([np.zeros(m), profile, np.zeros(m)])
    n = profile.size
    rhs = np.ones(n)
    for k in range(-m, m + 1):
        rhs += delta.prob(k) * padded[m + k: m + k + n]
    return float(np.max(np.abs(profile - rhs))) if n else 0.0


def closed_form_D(d, z, delta, boundary=NECESSARY):
    """Quadratic closed form ``A + B z - z^2 / (2 sum_{k>0} k^2 p_k)``.

    Only valid for symmetric increments.
    """
    if not delta.symmetric:
        raise ValueError("closed form needs a symmetric increment distribution")
    s2 = delta.second_moment
    if boundary == NECESSARY:
        lo, hi, num = -1, d + 1, d + 1 + d * z - z * z
    elif boundary == SUFFICIENT:
        lo, hi, num = -d - 1, 2 * d + 1, 2 * d * d + 3 * d + 1 + d * z - z * z
    else:
        raise ValueError(f"unknown boundary pair {boundary!r}")
    if z <= lo or z >= hi:
        return 0.0
    if s2 == 0.0:
        return float("inf")
    return num / s2


def bound_eq5(d, delta):
    """Expected rounds at the optimal start ``z = d/2`` for both boundary pairs."""
    if not delta.symmetric:
        raise ValueError("bound needs a symmetric increment distribution")
    s2 = delta.second_moment
    if s2 == 0.0:
        inf = float("inf")
        return BoundReport(d, "eq5_general", inf, inf, notes="no relative motion: the game never ends")
    lower = (d * d / 4 + d + 1) / s2
    upper = (9 * d * d / 4 + 3 * d + 1) / s2
    return BoundReport(d, "eq5_general", lower, upper,
                       notes="tick bounds need E(Y), which the increment law does not fix")


def theorem1_bounds(d, epsilon, m, p_0m, p_step):
    """Loose tick envelope over every clock with the given continuity and reach."""
    if not 0.0 < epsilon < 1.0:
        raise ValueError("epsilon must lie strictly between 0 and 1")
    if p_0m <= 0.0:
        raise ValueError("p_0m must be positive")
    if not 1 <= m <= d:
        raise ValueError(f"m must lie in 1..{d}")
    n_lower = (d + 4 + 4 / d) * p_step / (4 * m * m * epsilon * (2 - epsilon))
    n_upper = (9 * d / 4 + 3 + 1 / d) / (2 * (1 - epsilon) * m * p_0m)
    return BoundReport(d, "theorem1", float("nan"), float("nan"), n_lower, n_upper,
                       notes="envelope over all clocks with these parameters; not tight")


def _ladder_delta(delta):
    x = delta * (1 - delta)
    return DeltaDistribution(1, np.array([x, 1 - 2 * x, x]), symmetric=True)


def theorem2_bounds(d, delta):
    """Both readings of the linear-in-d ladder bounds.

    Returns ``(headline, appendix_exact)``. The headline report uses the
    printed coefficients 1/8, 1/2 and 5/8, 3/2 without the O(1/d) terms; the
    exact report evaluates the closed forms at ``z = d/2`` with ``N = D delta / d``,
    whose upper coefficient is 9/8.
    """
    if not 0.0 < delta < 1.0:
        raise ValueError("delta must lie strictly between 0 and 1")
    ey = d / delta
    h_lo = d / (8 * (1 - delta)) + 1 / (2 * (1 - delta))
    h_hi = 5 * d / (8 * (1 - delta)) + 3 / (2 * (1 - delta))
    note = ("headline upper coefficient 5/8 disagrees with the closed form at z=d/2 "
            "under boundaries (-d-1, 2d+1), which gives 9/8")
    headline = BoundReport(d, "theorem2_headline", h_lo * ey, h_hi * ey, h_lo, h_hi, note)
    ld = _ladder_delta(delta)
    D_lo = closed_form_D(d, d / 2, ld, NECESSARY)
    D_hi = closed_form_D(d, d / 2, ld, SUFFICIENT)
    exact = BoundReport(d, "theorem2_appendix_exact", D_lo, D_hi, D_lo / ey, D_hi / ey, note)
    return headline, exact


def perfect_vs_ladder_bounds(d, delta):
    """Rounds and ticks when a perfect clock leads a ladder clock from ``z = 0``."""
    if not 0.0 < delta <= 1.0:
        raise ValueError("delta must lie in (0, 1]")
    if delta == 1.0:
        inf = float("inf")
        return BoundReport(d, "perfect_vs_ladder", inf, inf, inf, inf, "two perfect clocks never halt")
    D_lo = (d + 1) / (1 - delta)
    D_hi = (2 * d + 1) / (1 - delta)
    return BoundReport(d, "perfect_vs_ladder", D_lo, D_hi, D_lo / d, D_hi / d,
                       "N = D_0 / d since the perfect clock ticks every d rounds")


def perfect_vs_ladder_D(d, z, delta, boundary=NECESSARY):
    """Linear profile ``(d + 1 - z)/(1 - delta)`` (or ``2d + 1``); zero outside."""
    top = d + 1 if boundary == NECESSARY else 2 * d + 1
    if z < 0 or z >= top:
        return 0.0
    return (top - z) / (1 - delta)


def simulate_absorption(problem, rng, block=4096):
    """Rounds until one simulated walk leaves the interval."""
    delta = problem.delta
    cdf = np.cumsum(delta.probs)
    state = np.zeros(_kernels.W_NSLOTS, dtype=np.int64)
    state[_kernels.W_Z] = problem.z
    while not state[_kernels.W_DONE]:
        _kernels.walk_block(cdf, delta.m, problem.lower_boundary, problem.upper_boundary,
                            rng.random(block), state)
    return int(state[_kernels.W_STEPS])
