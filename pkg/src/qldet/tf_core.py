"""Rational quadrature-picture transfer functions and their constraints.

Scalar transfer functions are stored in pole-zero-gain form over the
variable ``s = i*Omega``::

    g(Omega) = gain * prod_j (i Omega - z_j) / prod_k (i Omega - p_k)

A two-photon quadrature transfer matrix is diagonal, ``diag(g11, g22)``,
and is physically realizable when it satisfies the symplectic condition
``G^dag(-conj(Omega)) Theta G(-Omega) = Theta`` with
``Theta = [[0, i], [-i, 0]]``, together with the realness condition
``G(-Omega) = G^dag(Omega)`` that makes the quadrature impulse response
real in the time domain.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .doubled import QUADRATURE_FROM_SIDEBAND
from .errors import NotRealizable, PoleHit

THETA = np.array([[0.0, 1.0j], [-1.0j, 0.0]])

# |i*Omega - p| below this (relative) triggers PoleHit.
TOL_POLE_HIT = 1e-9


def _as_complex_tuple(values) -> tuple:
    return tuple(complex(v) for v in values)


@dataclass(frozen=True)
class RationalFunction:
    """Scalar rational transfer function in pole-zero-gain form.

    Zeros and poles are locations in the ``s = i*Omega`` variable (rad/s).
    The function must be proper (no more zeros than poles) and zeros and
    poles must not coincide.
    """

    zeros: tuple = ()
    poles: tuple = ()
    gain: complex = 1.0

    def __post_init__(self):
        object.__setattr__(self, "zeros", _as_complex_tuple(self.zeros))
        object.__setattr__(self, "poles", _as_complex_tuple(self.poles))
        object.__setattr__(self, "gain", complex(self.gain))
        if self.gain == 0:
            raise ValueError("gain must be nonzero")
        if len(self.zeros) > len(self.poles):
            raise ValueError(
                "improper rational function: more zeros than poles")
        for z in self.zeros:
            for p in self.poles:
                if abs(z - p) <= 1e-12 * (1.0 + abs(p)):
                    raise ValueError(
                        f"zero {z} coincides with pole {p}; cancel them first")

    @property
    def order(self) -> int:
        return len(self.poles)

    def __call__(self, omega):
        return evaluate_rational(self, omega)


@dataclass(frozen=True)
class QuadratureTransferMatrix:
    """Diagonal 2x2 transfer matrix diag(g11, g22) in the quadrature picture."""

    g11: RationalFunction
    g22: RationalFunction

    def __call__(self, omega) -> np.ndarray:
        return np.array([[evaluate_rational(self.g11, omega), 0.0],
                         [0.0, evaluate_rational(self.g22, omega)]])

    @property
    def order(self) -> int:
        return max(self.g11.order, self.g22.order)

    def all_poles(self) -> tuple:
        return self.g11.poles + self.g22.poles

    def all_roots(self) -> tuple:
        return (self.g11.poles + self.g11.zeros
                + self.g22.poles + self.g22.zeros)


@dataclass(frozen=True)
class FrequencyGrid:
    """Strictly increasing, nonempty grid of real frequencies (rad/s)."""

    points: np.ndarray = field(default_factory=lambda: np.array([1.0]))
    scale: str = "logarithmic"

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=float)
        if pts.ndim != 1 or pts.size == 0:
            raise ValueError("grid must be a nonempty 1-d array")
        if np.any(np.diff(pts) <= 0):
            raise ValueError("grid points must be strictly increasing")
        if self.scale not in ("linear", "logarithmic"):
            raise ValueError("scale must be 'linear' or 'logarithmic'")
        object.__setattr__(self, "points", pts)

    def __len__(self) -> int:
        return self.points.size

    def __iter__(self):
        return iter(self.points)

    @classmethod
    def logarithmic(cls, omega_min: float, omega_max: float,
                    n: int = 400) -> "FrequencyGrid":
        if omega_min <= 0:
            raise ValueError("logarithmic grid requires omega_min > 0")
        pts = np.logspace(np.log10(omega_min), np.log10(omega_max), n)
        return cls(points=pts, scale="logarithmic")

    @classmethod
    def linear(cls, omega_min: float, omega_max: float,
               n: int = 400) -> "FrequencyGrid":
        return cls(points=np.linspace(omega_min, omega_max, n),
                   scale="linear")

    @classmethod
    def default_for(cls, tf: "QuadratureTransferMatrix",
                    n: int = 400) -> "FrequencyGrid":
        """400 logarithmic points over [1e-3, 1e3] x (largest pole magnitude)."""
        mags = [abs(p) for p in tf.all_poles()] or [abs(r) for r in tf.all_roots()]
        scale = max(mags) if mags and max(mags) > 0 else 1.0
        return cls.logarithmic(1e-3 * scale, 1e3 * scale, n)


def evaluate_rational(rf: RationalFunction, omega) -> complex:
    """Evaluate gain * prod(i w - z_j) / prod(i w - p_k) at ``omega``.

    Raises
    ------
    PoleHit
        When ``i*omega`` lies within the scale-invariant pole guard
        ``|i w - p| < 1e-9 (1 + |p|)`` of any pole.
    """
    s = 1j * complex(omega)
    for p in rf.poles:
        if abs(s - p) < TOL_POLE_HIT * (1.0 + abs(p)):
            raise PoleHit(f"evaluation at {omega} hits pole {p}")
    num = np.prod([s - z for z in rf.zeros]) if rf.zeros else 1.0
    den = np.prod([s - p for p in rf.poles]) if rf.poles else 1.0
    return complex(rf.gain * num / den)


def conjugate_partner(rf: RationalFunction) -> RationalFunction:
    """The lossless partner g22 with poles/zeros conjugated and frequency flipped.

    For ``g11 = gain * prod(iw - z)/prod(iw - p)`` the symplectic condition
    forces ``g22(w) = (1/conj(gain)) * prod(-iw - conj(p))/prod(-iw - conj(z))``,
    i.e. zeros at ``-conj(p)``, poles at ``-conj(z)`` and inverted conjugate gain.
    """
    if len(rf.zeros) != len(rf.poles):
        raise NotRealizable(
            "a lossless diagonal pair needs equally many zeros and poles; "
            f"got {len(rf.zeros)} zeros and {len(rf.poles)} poles")
    return RationalFunction(
        zeros=tuple(-np.conj(p) for p in rf.poles),
        poles=tuple(-np.conj(z) for z in rf.zeros),
        gain=1.0 / np.conj(rf.gain),
    )


def build_quadrature_tf(g11):
    """Construct the realizable diagonal pair from its first entry.

    Parameters
    ----------
    g11 : RationalFunction
        Pole-zero-gain spec of the (1,1) entry.

    Returns
    -------
    QuadratureTransferMatrix
        ``diag(g11, g22)`` with g22 the forced conjugate partner.

    Raises
    ------
    NotRealizable
        When the realness coefficient conditions fail (pole/zero sets not
        closed under conjugation or gain not real), or when g11 is strictly
        proper so no lossless partner exists.
    """
    if not isinstance(g11, RationalFunction):
        g11 = RationalFunction(*g11)
    g22 = conjugate_partner(g11)
    tf = QuadratureTransferMatrix(g11=g11, g22=g22)
    if not check_realness(tf):
        raise NotRealizable(
            "pole-zero choice violates the time-domain realness conditions "
            "(coefficient equations a_j = 0)")
    return tf


def check_symplectic_realizability(tf: QuadratureTransferMatrix,
                                   grid: FrequencyGrid,
                                   tol: float = 1e-10):
    """Residual of the symplectic condition over the grid.

    Returns a ``(passed, max_residual)`` pair where the residual at each grid
    point is the spectral norm of ``G^dag(-w) Theta G(-w) - Theta`` (real w).
    """
    worst = 0.0
    for omega in grid.points:
        g = tf(-omega)
        res = g.conj().T @ THETA @ g - THETA
        worst = max(worst, float(np.linalg.norm(res, 2)))
    return SymplecticCheck(passed=bool(worst < tol), max_residual=worst)


@dataclass(frozen=True)
class SymplecticCheck:
    passed: bool
    max_residual: float

    def __bool__(self) -> bool:
        return self.passed


def _realness_coefficients(rf: RationalFunction) -> np.ndarray:
    """Coefficients a_j of the expanded realness identity for one entry.

    Realness of the entry is equivalent to the polynomial identity
    ``gain*N(t)*conj(D)(t) == conj(gain)*conj(N)(t)*D(t)`` where N, D are the
    monic numerator/denominator and conj acts on coefficients.
    """
    num = np.poly(rf.zeros) if rf.zeros else np.array([1.0 + 0j])
    den = np.poly(rf.poles) if rf.poles else np.array([1.0 + 0j])
    lhs = rf.gain * np.convolve(num, den.conj())
    rhs = np.conj(rf.gain) * np.convolve(num.conj(), den)
    return lhs - rhs


def check_realness(tf: QuadratureTransferMatrix, tol: float = 1e-9) -> bool:
    """True when both entries satisfy G(-Omega) = conj(G(Omega)) on the real axis."""
    for rf in (tf.g11, tf.g22):
        coeffs = _realness_coefficients(rf)
        scale = max(1.0, abs(rf.gain)) * max(
            1.0, max((abs(r) for r in rf.zeros + rf.poles), default=1.0))
        if np.abs(coeffs).max() > tol * scale:
            return False
    return True


def free_parameter_count(n: int) -> int:
    """Independent real parameters of a realizable order-n diagonal pair: 2n."""
    if not isinstance(n, (int, np.integer)) or n < 1:
        raise ValueError("order n must be a positive integer")
    return 2 * int(n)


def picture_convert(mat: np.ndarray, direction: str) -> np.ndarray:
    """Conjugate a 2x2 matrix between the quadrature and sideband pictures.

    ``direction`` is ``"quadrature->sideband"`` or ``"sideband->quadrature"``.
    The conversion uses the fixed unitary relating (a, a^dag) to
    (X, Y) = ((a+a^dag)/sqrt2, (a-a^dag)/(sqrt2 i)); round-trips are exact.
    """
    mat = np.asarray(mat, dtype=complex)
    if mat.shape != (2, 2):
        raise ValueError("picture_convert expects a 2x2 matrix")
    u = QUADRATURE_FROM_SIDEBAND
    if direction == "quadrature->sideband":
        return u.conj().T @ mat @ u
    if direction == "sideband->quadrature":
        return u @ mat @ u.conj().T
    raise ValueError(
        "direction must be 'quadrature->sideband' or 'sideband->quadrature'")


def internal_squeezing_g11(alpha: float, beta: float) -> RationalFunction:
    """g11 = (alpha + i Omega)/(beta - i Omega) in pole-zero-gain form."""
    if alpha <= 0 or beta <= 0:
        raise ValueError("alpha and beta must be positive rates")
    return RationalFunction(zeros=(-alpha,), poles=(beta,), gain=-1.0)


def expander_g11(alpha1: float, beta1: float, alpha2: float,
                 beta2: float) -> RationalFunction:
    """Second-order g11 = (iw - a1)(iw - b1) / ((iw - a2)(iw - b2))."""
    return RationalFunction(zeros=(alpha1, beta1), poles=(alpha2, beta2),
                            gain=1.0)
