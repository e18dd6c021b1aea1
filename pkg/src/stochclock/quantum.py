"""Dense checks of the clock channel: Kraus form, Choi matrix, continuity certificate.

These constructions use ``D = d + 1`` clockwork states ``0..d``. The jump
matrix is expanded homogeneously on that circle,
``p[i, m] = probs[(m - i) mod D]``; a jump that wraps past ``d`` is a tick and
sends the clockwork to state 0. Output space ordering is ``C (x) T`` with the
tick register as the fast index; the doubled space is ``C (x) C'``.

All matrices are real, so positivity is probed with real unit vectors.
"""
from dataclasses import dataclass, field

import numpy as np

from .clock import epsilon_continuity

MAX_STATES = 64
RESIDUAL_TOL = 1e-12
POSITIVITY_TOL = -1e-10
DENSITY_TOL = 1e-10


class VerificationError(AssertionError):
    """A numerical check failed; ``witness`` holds the offending vector or entry."""

    def __init__(self, message, witness=None):
        super().__init__(message)
        self.witness = witness


def jump_matrix(clock):
    """``p[i, m]`` on the ``d + 1`` clockwork states."""
    probs = clock.jumps.probs
    D = probs.size
    P = np.empty((D, D))
    for i in range(D):
        P[i] = np.roll(probs, i)
    return P


def _check_size(clock):
    D = clock.d + 1
    if D > MAX_STATES:
        raise ValueError(f"{D} clockwork states is too many for dense checks (max {MAX_STATES})")
    return D


@dataclass
class KrausSet:
    operators: list  # each (2D, D)
    labels: list  # (i, m)
    D: int

    def completeness(self):
        return sum(M.T @ M for M in self.operators)

    def completeness_residual(self):
        return float(np.max(np.abs(self.completeness() - np.eye(self.D))))

    def apply(self, rho):
        return sum(M @ rho @ M.T for M in self.operators)


def _ket(D, i):
    v = np.zeros(D)
    v[i] = 1.0
    return v


def build_kraus(clock, check=True):
    """One operator per nonzero ``p[i, m]``.

    Tick branch (``m < i``): ``sqrt(p) |0><i| (x) |1>_T``;
    no-tick branch (``m >= i``): ``sqrt(p) |m><i| (x) |0>_T``.
    """
    D = _check_size(clock)
    P = jump_matrix(clock)
    ops, labels = [], []
    tick, idle = _ket(2, 1), _ket(2, 0)
    for i in range(D):
        for m in range(D):
            p = P[i, m]
            if p == 0.0:
                continue
            if m < i:
                out = np.kron(_ket(D, 0), tick)
            else:
                out = np.kron(_ket(D, m), idle)
            ops.append(np.sqrt(p) * np.outer(out, _ket(D, i)))
            labels.append((i, m))
    kraus = KrausSet(ops, labels, D)
    if check:
        r = kraus.completeness_residual()
        if r > RESIDUAL_TOL:
            raise VerificationError(f"Kraus completeness residual {r:.3e}", r)
    return kraus


def validate_density(rho, D):
    rho = np.asarray(rho)
    if rho.shape != (D, D):
        raise ValueError(f"density matrix must be {D}x{D}, got {rho.shape}")
    if abs(np.trace(rho) - 1.0) > DENSITY_TOL:
        raise ValueError("density matrix must have unit trace")
    if np.max(np.abs(rho - rho.conj().T)) > DENSITY_TOL:
        raise ValueError("density matrix must be Hermitian")
    if np.linalg.eigvalsh(rho).min() < -DENSITY_TOL:
        raise ValueError("density matrix must be positive semidefinite")
    return rho


def apply_by_definition(clock, rho):
    """The clock map written out branch by branch; reads only the diagonal of ``rho``."""
    D = clock.d + 1
    P = jump_matrix(clock)
    out = np.zeros((2 * D, 2 * D))
    idle = np.diag([1.0, 0.0])
    tick = np.diag([0.0, 1.0])
    for j in range(D):
        w = np.real(rho[j, j])
        for m in range(D):
            p = P[j, m]
            if p == 0.0:
                continue
            if m >= j:
                out += w * p * np.kron(np.outer(_ket(D, m), _ket(D, m)), idle)
            else:
                out += w * p * np.kron(np.outer(_ket(D, 0), _ket(D, 0)), tick)
    return out


def apply_channel_two_ways(clock, rho):
    """Return ``(via_kraus, via_definition, max_abs_difference)``."""
    D = _check_size(clock)
    rho = validate_density(rho, D)
    via_kraus = build_kraus(clock).apply(rho)
    via_def = apply_by_definition(clock, rho)
    return via_kraus, via_def, float(np.max(np.abs(via_kraus - via_def)))


def trace_out_tick(out, D):
    """Partial trace over T of an operator on ``C (x) T``."""
    return np.einsum("iaja->ij", out.reshape(D, 2, D, 2))


def partial_trace_c(Z, D):
    """``tr_C`` of an operator on ``C (x) C'``."""
    return np.einsum("iaib->ab", Z.reshape(D, D, D, D))


def choi_of_difference(clock):
    """``J(Phi) = sum_ij Phi(|i><j|) (x) |i><j|`` for ``Phi = tr_T o M - id``.

    Each Kraus operator splits into one ``D x D`` block per tick value, and
    ``tr_T o M`` contributes ``vec(A) vec(A)^T`` per block.
    """
    D = _check_size(clock)
    kraus = build_kraus(clock)
    blocks = np.stack(kraus.operators).reshape(-1, D, 2, D).transpose(0, 2, 1, 3).reshape(-1, D * D)
    omega = np.eye(D).ravel()
    return blocks.T @ blocks - np.outer(omega, omega)


@dataclass
class CertificatePair:
    X: np.ndarray
    Z: np.ndarray
    J: np.ndarray
    D: int
    p_diag: np.ndarray = field(repr=False)

    def identity_residual(self):
        return float(np.max(np.abs(self.Z - self.J - self.X)))


def certificate_X(P):
    D = P.shape[0]
    X = np.zeros((D * D, D * D))
    for i in range(D):
        for j in range(D):
            if i != j:
                X += np.kron(np.outer(_ket(D, i), _ket(D, j)), np.outer(_ket(D, i), _ket(D, j)))
        e = np.outer(_ket(D, i), _ket(D, i))
        X += (1.0 - P[i, i]) * np.kron(e, e)
    return X


def certificate_Z(P):
    """Diagonal ``Z``: weight ``p[i, m]`` on ``|m, i>`` for ``m > i`` and on ``|0, i>`` for ``m < i``."""
    D = P.shape[0]
    z = np.zeros((D, D))  # z[c, c']
    for i in range(D):
        for m in range(D):
            if m > i:
                z[m, i] += P[i, m]
            elif m < i:
                z[0, i] += P[i, m]
    return np.diag(z.ravel())


def build_certificate(clock):
    """Dual feasible point ``(X, Z)`` with ``Z = X + J(Phi)``."""
    D = _check_size(clock)
    P = jump_matrix(clock)
    J = choi_of_difference(clock)
    X = certificate_X(P)
    Z = certificate_Z(P)
    pair = CertificatePair(X, Z, J, D, np.diag(P).copy())
    r = pair.identity_residual()
    if r > RESIDUAL_TOL:
        raise VerificationError(f"certificate identity Z = X + J residual {r:.3e}", r)
    return pair


@dataclass
class CertificateReport:
    min_form_X: float
    min_form_Z: float
    identity_residual: float
    offdiag_residual: float
    diag_residual: float
    norm: float
    epsilon: float
    failures: list
    witness: object = None

    @property
    def passed(self):
        return not self.failures


def verify_continuity_certificate(pair, clock, trials, rng=None):
    """Probe positivity of ``X`` and ``Z`` and check ``tr_C Z = diag(1 - p_ii)``."""
    if trials < 1:
        raise ValueError("trials must be at least 1")
    rng = np.random.default_rng() if rng is None else rng
    n = pair.D * pair.D
    V = rng.standard_normal((trials, n))
    V /= np.linalg.norm(V, axis=1, keepdims=True)
    fx = np.einsum("ti,ij,tj->t", V, pair.X, V)
    fz = np.einsum("ti,ij,tj->t", V, pair.Z, V)
    failures, witness = [], None
    if fx.min() < POSITIVITY_TOL:
        failures.append("X not positive")
        witness = V[int(np.argmin(fx))]
    if fz.min() < POSITIVITY_TOL:
        failures.append("Z not positive")
        witness = V[int(np.argmin(fz))]

    T = partial_trace_c(pair.Z, pair.D)
    off = T - np.diag(np.diag(T))
    off_res = float(np.max(np.abs(off)))
    diag_res = float(np.max(np.abs(np.diag(T) - (1.0 - pair.p_diag))))
    if off_res > RESIDUAL_TOL:
        failures.append("tr_C Z not diagonal")
        witness = np.unravel_index(int(np.argmax(np.abs(off))), off.shape)
    if diag_res > RESIDUAL_TOL:
        failures.append("tr_C Z diagonal differs from 1 - p_ii")
    norm = float(np.max(np.abs(np.linalg.eigvalsh(T))))
    eps = epsilon_continuity(clock)
    if abs(norm - eps) > RESIDUAL_TOL:
        failures.append(f"||tr_C Z|| = {norm} differs from epsilon = {eps}")
    id_res = pair.identity_residual()
    if id_res > RESIDUAL_TOL:
        failures.append("Z - J - X nonzero")
    return CertificateReport(float(fx.min()), float(fz.min()), id_res, off_res, diag_res,
                             norm, eps, failures, witness)
