"""QCRB-limited sensitivity analysis of realizable detectors.

The probe degree of freedom is an internal quadrature F of the detector.
With an unsqueezed vacuum input (S_uu = 1) its spectrum is
``S_FF = |G_uF|^2`` where G_uF is the open-loop transfer function from the
input quadratures to F, and the estimator variance of a linearly coupled
classical signal obeys ``S_xx >= hbar^2 / S_FF``.  The total photon-number
variance ``sigma_NN = 2 N Int_0^inf dW/2pi |g_uF(W)|^2`` (natural units)
controls the integrated signal-to-noise ratio, so the optimal probe mode is
the one with the largest sigma_NN; divergence signals a detection-mode
resonance reaching the imaginary axis.

All computations are in natural units (hbar = 1); physical constants enter
only through :class:`ProbeCoupling` at reporting boundaries.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import quad

from .doubled import QUADRATURE_FROM_SIDEBAND, quadrature_coefficients
from .errors import IntegrationFailure, NearThresholdWarning, SingularResolvent
from .statespace import StateSpace
from .tf_core import FrequencyGrid

# Eigenvalues with |Re| below this (relative) mark a divergent response.
TOL_DIVERGENCE = 1e-9
# Relative margin below which a near-threshold warning is issued.
TOL_NEAR_THRESHOLD = 1e-6

QUADRATURES = ("amplitude", "phase")


@dataclass(frozen=True)
class ProbeCoupling:
    """Physical constants of the linearized signal-to-probe coupling.

    ``kappa = omega0 sqrt(2 N) / L`` is the field-side coefficient of the
    probe operator; hbar is kept at 1 internally and applied in reports.
    """

    omega0: float
    length: float
    photon_number: float
    hbar: float = 1.0

    def __post_init__(self):
        for name in ("omega0", "length", "photon_number", "hbar"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")

    @property
    def kappa(self) -> float:
        return self.omega0 * np.sqrt(2.0 * self.photon_number) / self.length


@dataclass
class SensitivityReport:
    """Per-probe-mode sensitivity summary sampled over a frequency grid."""

    mode_index: int
    quadrature: str
    grid: FrequencyGrid
    g_uf_samples: np.ndarray
    s_ff_samples: np.ndarray
    sigma_nn: float
    snr_bound: float
    diverges: bool
    divergence_frequency: float | None
    warnings: tuple = field(default_factory=tuple)


@dataclass(frozen=True)
class PhotonVariance:
    value: float
    diverges: bool
    near_threshold: bool = False


@dataclass(frozen=True)
class ProbeSelection:
    mode: int
    quadrature: str
    report: SensitivityReport
    divergent: tuple


@dataclass(frozen=True)
class DivergencePoint:
    parameter: float
    diverges: bool
    divergence_frequency: float | None


def internal_mode_tf(ss: StateSpace, mode: int, quadrature: str,
                     omega: float) -> np.ndarray:
    """Row of the map from input quadratures to one internal quadrature.

    Returns the length-2 complex row ``(from u^1, from u^2)`` obtained from
    the selected row of ``(-i w I - A)^-1 B`` with the input pair rotated to
    quadratures.  ``ss`` must be a doubled sideband-basis system with a
    single (doubled) input.
    """
    n_modes = ss.n_states // 2
    if ss.n_states % 2 or mode >= n_modes:
        raise ValueError("mode index out of range for the doubled state space")
    w = quadrature_coefficients(n_modes, mode, quadrature)
    s = -1j * omega
    eigs = np.linalg.eigvals(ss.a)
    for lam in eigs:
        if abs(s - lam) < 1e-12 * (1.0 + abs(lam)):
            raise SingularResolvent(
                f"internal response diverges at {omega} (eigenvalue {lam})")
    resolvent = np.linalg.solve(s * np.eye(ss.n_states) - ss.a, ss.b)
    return (w @ resolvent) @ QUADRATURE_FROM_SIDEBAND.conj().T


def probe_spectrum(g_uf_samples: np.ndarray) -> np.ndarray:
    """Pointwise S_FF = S_uu |G_uF|^2 with S_uu = 1.

    Accepts scalar samples or rows over both input quadratures (the row
    modulus squared sums the two independent vacuum inputs).
    """
    g = np.asarray(g_uf_samples)
    if g.ndim > 1:
        return np.sum(np.abs(g) ** 2, axis=-1).astype(float)
    return (np.abs(g) ** 2).astype(float)


def _divergence_state(ss: StateSpace):
    """Classify the spectrum of A: divergent / near-threshold eigenvalues."""
    if ss.n_states == 0:
        return False, None, False
    eigs = np.linalg.eigvals(ss.a)
    scale = max(1.0, float(np.abs(eigs).max()))
    rel = np.abs(eigs.real) / scale
    divergent = rel < TOL_DIVERGENCE
    if np.any(divergent):
        freq = float(np.abs(eigs.imag[divergent]).max())
        return True, freq, False
    near = np.any(rel < TOL_NEAR_THRESHOLD)
    return False, None, bool(near)


def photon_variance(ss: StateSpace, mode: int, quadrature: str,
                    coupling: ProbeCoupling, rtol: float = 1e-8,
                    omega_max: float | None = None) -> PhotonVariance:
    """Total photon-number variance 2N Int_0^inf dW/2pi |g_uF(W)|^2.

    The integrand is evaluated from the internal-mode transfer row in
    natural units and integrated by adaptive Gauss-Kronrod quadrature on
    [0, omega_max] (omega_max defaults to 1e3 times the largest rate) with
    an analytic 1/W^2 tail estimate.  Divergence is detected from the
    spectrum of A (imaginary-axis eigenvalues), not from integral blow-up.

    Raises
    ------
    IntegrationFailure
        When the quadrature does not meet its error target.
    """
    diverges, freq, near = _divergence_state(ss)
    if near:
        warnings.warn(
            "system is within 1e-6 of an instability threshold; the "
            "reported variance is close to divergent", NearThresholdWarning)
    if diverges:
        return PhotonVariance(value=np.inf, diverges=True)
    if ss.n_states == 0:
        return PhotonVariance(value=0.0, diverges=False)
    eigs = np.linalg.eigvals(ss.a)
    rate = float(np.abs(eigs).max()) or 1.0
    w_max = omega_max if omega_max is not None else 1e3 * rate

    def integrand(w: float) -> float:
        row = internal_mode_tf(ss, mode, quadrature, w)
        return float(np.sum(np.abs(row) ** 2))

    breakpoints = sorted({float(abs(lam.imag)) for lam in eigs
                          if abs(lam.imag) > 1e-12 and abs(lam.imag) < w_max})
    value, err = quad(integrand, 0.0, w_max, limit=400,
                      epsrel=rtol, epsabs=0.0,
                      points=breakpoints or None)
    if value > 0 and err > max(1e-6, 100.0 * rtol) * value:
        raise IntegrationFailure(
            f"quadrature error {err:.2e} exceeds tolerance on value {value:.2e}")
    tail = w_max * integrand(w_max)  # integrand ~ c/W^2 beyond w_max
    total = 2.0 * coupling.photon_number * (value + tail) / (2.0 * np.pi)
    return PhotonVariance(value=float(total), diverges=False,
                          near_threshold=near)


def qcrb_bound(s_ff_samples: np.ndarray, coupling: ProbeCoupling) -> np.ndarray:
    """QCRB displacement bound hbar^2 / S_FF, +inf where the spectrum vanishes."""
    s_ff = np.asarray(s_ff_samples, dtype=float)
    if np.any(s_ff < 0):
        raise ValueError("S_FF must be nonnegative")
    out = np.full_like(s_ff, np.inf)
    np.divide(coupling.hbar ** 2, s_ff, out=out, where=s_ff > 0)
    return out


def snr_flat_signal(report: SensitivityReport, coupling: ProbeCoupling,
                    x_c_abs: float) -> float:
    """Integrated SNR bound (omega0^2 |x_c|^2 / L^2) sigma_NN for a flat signal."""
    if x_c_abs == 0.0:
        return 0.0
    sigma = report.sigma_nn
    if not np.isfinite(sigma):
        return np.inf
    return float((coupling.omega0 ** 2) * (x_c_abs ** 2)
                 / (coupling.length ** 2) * sigma)


def build_report(ss: StateSpace, mode: int, quadrature: str,
                 coupling: ProbeCoupling, grid: FrequencyGrid,
                 rtol: float = 1e-8) -> SensitivityReport:
    """Assemble the sampled sensitivity report for one probe choice."""
    rows = []
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        pv = photon_variance(ss, mode, quadrature, coupling, rtol=rtol)
    notes = tuple(str(w.message) for w in caught
                  if issubclass(w.category, NearThresholdWarning))
    for omega in grid.points:
        try:
            rows.append(coupling.kappa * internal_mode_tf(
                ss, mode, quadrature, omega))
        except SingularResolvent:
            rows.append(np.array([np.inf + 0j, np.inf + 0j]))
    g_uf = np.array(rows)
    s_ff = probe_spectrum(g_uf)
    diverges, freq, _ = _divergence_state(ss)
    snr = (np.inf if not np.isfinite(pv.value) else
           (coupling.omega0 ** 2) / (coupling.length ** 2) * pv.value)
    return SensitivityReport(
        mode_index=mode, quadrature=quadrature, grid=grid,
        g_uf_samples=g_uf, s_ff_samples=s_ff, sigma_nn=pv.value,
        snr_bound=float(snr), diverges=diverges,
        divergence_frequency=freq, warnings=notes)


def optimal_probe_mode(ss: StateSpace, coupling: ProbeCoupling,
                       grid: FrequencyGrid,
                       rtol: float = 1e-8) -> ProbeSelection:
    """Probe mode/quadrature with the largest photon-number variance.

    Divergent candidates beat any finite one; when several diverge, all of
    them are reported in ``divergent``.
    """
    n_modes = ss.n_states // 2
    best = None
    divergent = []
    for mode in range(n_modes):
        for quadrature in QUADRATURES:
            report = build_report(ss, mode, quadrature, coupling, grid,
                                  rtol=rtol)
            if report.diverges:
                divergent.append((mode, quadrature, report))
            if best is None or _better(report, best[2]):
                best = (mode, quadrature, report)
    if best is None:
        raise ValueError("state space has no internal modes")
    return ProbeSelection(mode=best[0], quadrature=best[1], report=best[2],
                          divergent=tuple(divergent))


def _better(candidate: SensitivityReport, incumbent: SensitivityReport) -> bool:
    if candidate.diverges != incumbent.diverges:
        return candidate.diverges
    if candidate.diverges:
        return False
    return candidate.sigma_nn > incumbent.sigma_nn


def divergence_scan(system_factory, parameters) -> list:
    """Sweep a parameterized family, flagging imaginary-axis system poles.

    ``system_factory(p)`` must return the StateSpace at parameter value
    ``p``.  Divergence is decided from the eigenvalues of A; the divergence
    frequency is the offending eigenvalue's |imaginary part|.
    """
    points = []
    for p in parameters:
        ss = system_factory(p)
        diverges, freq, _ = _divergence_state(ss)
        points.append(DivergencePoint(parameter=float(p), diverges=diverges,
                                      divergence_frequency=freq))
    return points
