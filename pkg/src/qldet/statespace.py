"""Classical state-space machinery: realizations, responses, minimality.

Frequency convention: signals evolve as ``exp(-i Omega t)``, so the response
of ``xdot = A x + B u, y = C x + D u`` is ``H(Omega) = C (-i Omega I - A)^-1 B + D``.
This sign is pinned by the tuned-cavity example, whose response must reduce
to ``(Omega - i gamma)/(Omega + i gamma)`` up to a global sign.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import expm

from .doubled import QUADRATURE_FROM_SIDEBAND
from .errors import (ImproperTransferFunction, SingularResolvent,
                     SingularTransform)
from .tf_core import FrequencyGrid, QuadratureTransferMatrix, RationalFunction

# Relative singular-value cutoff for rank decisions in minimal_realization.
TOL_MINIMAL = 1e-9
# Relative eigenvalue guard for resolvent evaluation.
TOL_RESOLVENT = 1e-9


def _as_matrix(m, shape=None) -> np.ndarray:
    m = np.atleast_2d(np.asarray(m, dtype=complex))
    if shape is not None and m.size == 0:
        m = m.reshape(shape)
    return m


@dataclass(frozen=True)
class StateSpace:
    """Complex matrices (A, B, C, D) of a finite-dimensional linear system."""

    a: np.ndarray
    b: np.ndarray
    c: np.ndarray
    d: np.ndarray

    def __post_init__(self):
        a = _as_matrix(self.a)
        if a.size == 0:
            a = a.reshape(0, 0)
        d = _as_matrix(self.d)
        n = a.shape[0]
        p, m = d.shape
        b = _as_matrix(self.b, (n, m))
        c = _as_matrix(self.c, (p, n))
        if a.shape != (n, n):
            raise ValueError(f"A must be square, got {a.shape}")
        if b.shape != (n, m):
            raise ValueError(f"B must be {(n, m)}, got {b.shape}")
        if c.shape != (p, n):
            raise ValueError(f"C must be {(p, n)}, got {c.shape}")
        for name, mat in (("a", a), ("b", b), ("c", c), ("d", d)):
            object.__setattr__(self, name, mat)

    @property
    def n_states(self) -> int:
        return self.a.shape[0]

    @property
    def n_inputs(self) -> int:
        return self.d.shape[1]

    @property
    def n_outputs(self) -> int:
        return self.d.shape[0]


@dataclass(frozen=True)
class TimeResponse:
    """Sampled natural and forced output traces with the growth bound of A."""

    times: np.ndarray
    natural: np.ndarray
    forced: np.ndarray
    growth_bound: float

    @property
    def total(self) -> np.ndarray:
        return self.natural + self.forced


def frequency_response(ss: StateSpace, omega: float) -> np.ndarray:
    """Evaluate C (-i w I - A)^-1 B + D at real frequency ``omega``.

    Raises
    ------
    SingularResolvent
        When ``-i omega`` coincides with an eigenvalue of A within the
        scale-invariant guard.
    """
    if ss.n_states == 0:
        return ss.d.copy()
    s = -1j * omega
    eigs = np.linalg.eigvals(ss.a)
    for lam in eigs:
        if abs(s - lam) < TOL_RESOLVENT * (1.0 + abs(lam)):
            raise SingularResolvent(
                f"frequency {omega} is a pole of the system (eigenvalue {lam})")
    resolvent = np.linalg.solve(s * np.eye(ss.n_states) - ss.a, ss.b)
    return ss.c @ resolvent + ss.d


def _siso_companion(rf: RationalFunction):
    """Controllable-canonical (A, B, C, D) of one scalar entry.

    The realization is carried out in the variable ``w = -i Omega`` so that
    ``C (wI - A)^-1 B + D`` evaluated at ``w = -i Omega`` equals the rational
    function of ``s = i Omega``; poles at ``s = p`` land at eigenvalue ``-p``.
    """
    if len(rf.zeros) > len(rf.poles):
        raise ImproperTransferFunction(
            "cannot realize an improper transfer function")
    n = len(rf.poles)
    # Flip the variable: roots in w are the negatives of the roots in s.
    num = rf.gain * ((-1.0) ** (len(rf.zeros) - n)) * np.poly(
        [-z for z in rf.zeros])
    den = np.poly([-p for p in rf.poles])
    if n == 0:
        return (np.zeros((0, 0), complex), np.zeros((0, 1), complex),
                np.zeros((1, 0), complex), np.array([[complex(rf.gain)]]))
    num = np.concatenate([np.zeros(n + 1 - num.size, complex), num])
    d = num[0] / den[0]
    rem = num - d * den          # strictly proper remainder, degree < n
    a = np.zeros((n, n), complex)
    a[:-1, 1:] = np.eye(n - 1)
    a[-1, :] = -den[1:][::-1]
    b = np.zeros((n, 1), complex)
    b[-1, 0] = 1.0
    c = rem[1:][::-1].reshape(1, n)
    return a, b, c, np.array([[d]])


def canonical_realization(tf: QuadratureTransferMatrix) -> StateSpace:
    """Block-diagonal controllable-canonical realization of diag(g11, g22).

    The result may be non-minimal; its frequency response reproduces the
    transfer matrix exactly (up to roundoff) on any pole-avoiding grid.
    """
    a1, b1, c1, d1 = _siso_companion(tf.g11)
    a2, b2, c2, d2 = _siso_companion(tf.g22)
    n1, n2 = a1.shape[0], a2.shape[0]
    a = np.zeros((n1 + n2, n1 + n2), complex)
    a[:n1, :n1] = a1
    a[n1:, n1:] = a2
    b = np.zeros((n1 + n2, 2), complex)
    b[:n1, :1] = b1
    b[n1:, 1:] = b2
    c = np.zeros((2, n1 + n2), complex)
    c[:1, :n1] = c1
    c[1:, n1:] = c2
    d = np.zeros((2, 2), complex)
    d[0, 0] = d1[0, 0]
    d[1, 1] = d2[0, 0]
    return StateSpace(a, b, c, d)


def _restrict_to_controllable(ss: StateSpace, tol: float) -> StateSpace:
    """Project onto the reachable subspace (range of the controllability matrix)."""
    n = ss.n_states
    if n == 0:
        return ss
    blocks = [ss.b]
    for _ in range(n - 1):
        blocks.append(ss.a @ blocks[-1])
    ctrb = np.hstack(blocks)
    u, sv, _ = np.linalg.svd(ctrb)
    if sv.size == 0 or sv[0] == 0.0:
        rank = 0
    else:
        rank = int(np.sum(sv > tol * sv[0]))
    q = u[:, :rank]
    return StateSpace(q.conj().T @ ss.a @ q, q.conj().T @ ss.b,
                      ss.c @ q, ss.d)


def minimal_realization(ss: StateSpace, tol: float = TOL_MINIMAL) -> StateSpace:
    """Remove unreachable and unobservable states.

    Singular values below ``tol`` times the largest one count as zero, so the
    output dimension is the McMillan degree at that tolerance.  The frequency
    response is preserved exactly by the two orthogonal restrictions.
    """
    ss = _restrict_to_controllable(ss, tol)
    dual = StateSpace(ss.a.conj().T, ss.c.conj().T, ss.b.conj().T, ss.d.conj().T)
    dual = _restrict_to_controllable(dual, tol)
    return StateSpace(dual.a.conj().T, dual.c.conj().T, dual.b.conj().T,
                      dual.d.conj().T)


def is_hurwitz(a) -> bool:
    """True when every eigenvalue of ``a`` has a strictly negative real part.

    Eigenvalues within 1e-12 (relative) of the imaginary axis count as
    marginal, not stable, so threshold systems are classified as unstable.
    """
    a = _as_matrix(a)
    if a.size == 0:
        return True
    eigs = np.linalg.eigvals(a)
    scale = max(1.0, float(np.abs(eigs).max()))
    return bool(np.all(eigs.real < -1e-12 * scale))


def similarity_transform(ss: StateSpace, t: np.ndarray) -> StateSpace:
    """Return (T^-1 A T, T^-1 B, C T, D); the frequency response is unchanged."""
    t = _as_matrix(t)
    if t.size == 0 and ss.n_states == 0:
        return ss
    if t.shape != (ss.n_states, ss.n_states):
        raise ValueError("transformation matrix has the wrong shape")
    sv = np.linalg.svd(t, compute_uv=False)
    if sv[-1] <= 1e-13 * sv[0]:
        raise SingularTransform("transformation matrix is singular")
    a = np.linalg.solve(t, ss.a @ t)
    b = np.linalg.solve(t, ss.b)
    return StateSpace(a, b, ss.c @ t, ss.d)


def time_response(ss: StateSpace, x0, input_fn, t_end: float,
                  dt: float) -> TimeResponse:
    """Sampled natural and forced responses on a uniform time grid.

    The natural part is ``C exp(A t) x0``; the forced part steps the exact
    discretization obtained from the matrix exponential of the augmented
    system ``[[A, B], [0, 0]]``, holding the input at its midpoint sample
    over each step.  ``input_fn(t)`` returns the input vector (or scalar for
    single-input systems); ``None`` means zero input.
    """
    if dt <= 0:
        raise ValueError("dt must be positive")
    n_steps = max(1, int(round(t_end / dt)))
    times = np.arange(n_steps + 1) * dt
    n, m, p = ss.n_states, ss.n_inputs, ss.n_outputs

    def u_at(t: float) -> np.ndarray:
        if input_fn is None:
            return np.zeros(m, complex)
        return np.atleast_1d(np.asarray(input_fn(t), dtype=complex))

    if n == 0:
        natural = np.zeros((times.size, p), complex)
        forced = np.array([ss.d @ u_at(t) for t in times])
        return TimeResponse(times, natural, forced, 0.0)

    aug = np.zeros((n + m, n + m), complex)
    aug[:n, :n] = ss.a
    aug[:n, n:] = ss.b
    step = expm(aug * dt)
    ad, bd = step[:n, :n], step[:n, n:]

    x0 = np.zeros(n, complex) if x0 is None else np.asarray(x0, complex).reshape(n)
    x_nat = x0.copy()
    x_frc = np.zeros(n, complex)
    natural = np.empty((times.size, p), complex)
    forced = np.empty((times.size, p), complex)
    natural[0] = ss.c @ x_nat
    forced[0] = ss.c @ x_frc + ss.d @ u_at(0.0)
    for k in range(n_steps):
        x_nat = ad @ x_nat
        x_frc = ad @ x_frc + bd @ u_at(times[k] + 0.5 * dt)
        natural[k + 1] = ss.c @ x_nat
        forced[k + 1] = ss.c @ x_frc + ss.d @ u_at(times[k + 1])
    growth = float(np.max(np.linalg.eigvals(ss.a).real))
    return TimeResponse(times, natural, forced, growth)


def _response_as_quadrature(ss: StateSpace, omega: float,
                            picture: str) -> np.ndarray:
    h = frequency_response(ss, omega)
    if h.shape == (1, 1):
        h = h[0, 0] * np.eye(2)
    if h.shape != (2, 2):
        raise ValueError("tf_distance needs a 1x1 or 2x2 response")
    if picture == "sideband":
        u = QUADRATURE_FROM_SIDEBAND
        h = u @ h @ u.conj().T
    elif picture != "quadrature":
        raise ValueError("picture must be 'quadrature' or 'sideband'")
    return h


def tf_distance(ss: StateSpace, tf: QuadratureTransferMatrix,
                grid: FrequencyGrid, picture: str = "quadrature") -> float:
    """Worst-case distance between the system response and diag(g11, g22).

    The comparison is modulo a global sign: the distance is
    ``min over s in {+1,-1} of max over the grid of ||H(w) - s G(w)||_2``.
    ``picture`` states which picture the system inputs/outputs live in;
    sideband responses are converted to the quadrature picture first.
    Scalar (1x1) systems are compared as ``H * I``.
    """
    worst = {1.0: 0.0, -1.0: 0.0}
    for omega in grid.points:
        h = _response_as_quadrature(ss, omega, picture)
        g = tf(omega)
        for sign in (1.0, -1.0):
            worst[sign] = max(worst[sign],
                              float(np.linalg.norm(h - sign * g, 2)))
    return min(worst.values())
