"""Auxiliary-mode networks that amplify signal response without added noise.

A damped port mode ``a`` (bandwidth gamma) couples to two auxiliary modes
``b`` (squeezing-like, rate g_bdag, and beamsplitter-like, rate g_b) and
``c`` (rates g_cdag, g_c); each of those may carry further lossless chains
of modes ``d_j`` (on b) and ``e_j`` (on c).  The auxiliary network is
*hidden* when the closed-loop feedback matrix T_a vanishes at all
frequencies, in which case the input-output relation stays that of the bare
cavity while internal signal response can diverge.

Two independent computation routes are provided on purpose: the closed-form
chain elimination (:func:`aux_transfer`, :func:`invariance_matrix`) follows
the block-matrix algebra of the source analysis verbatim, while drift-based
quantities (:func:`network_drift`, :func:`conserved_observables`,
:func:`full_network_io`, :func:`signal_response_shift`) are assembled from
the network Hamiltonian, so invariance can be cross-checked without sharing
a code path.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from . import doubled
from .doubled import (add_exchange, add_pair_creation, assemble_dynamics,
                      commutation_form, quadrature_coefficients)
from .errors import BasisMismatch, ChainResonance, OnResonance
from .statespace import StateSpace
from .tf_core import FrequencyGrid

# Null-space singular values below this (relative) count as zero.
TOL_NULLSPACE = 1e-10


def _pairs(values) -> tuple:
    out = []
    for item in values:
        g, g_dag = item
        out.append((complex(g), complex(g_dag)))
    return tuple(out)


def _square(mat, n: int, name: str) -> np.ndarray:
    if mat is None:
        return np.zeros((n, n), complex)
    mat = np.asarray(mat, dtype=complex)
    if mat.shape != (n, n):
        raise ValueError(f"{name} must be {n}x{n}")
    if n and np.abs(np.diag(mat)).max() > 0:
        raise ValueError(f"{name} must have a zero diagonal (no self terms)")
    return mat


@dataclass(frozen=True)
class ModeNetwork:
    """Port mode plus auxiliary modes b, c and their lossless chains.

    ``d_couplings``/``e_couplings`` list per-chain-mode pairs
    ``(beamsplitter rate, squeezing rate)`` to b and c respectively;
    ``d_exchange``/``d_squeeze`` (and the e variants) are optional
    inter-chain coupling matrices with zero diagonals.  There is no direct
    coupling between the d and e chains.  The classical signal of strength
    ``signal_strength`` enters on ``signal_mode``'s ``signal_quadrature``.
    """

    gamma: float
    g_b: complex = 0.0
    g_bdag: complex = 0.0
    g_c: complex = 0.0
    g_cdag: complex = 0.0
    d_couplings: tuple = ()
    e_couplings: tuple = ()
    d_exchange: np.ndarray | None = None
    d_squeeze: np.ndarray | None = None
    e_exchange: np.ndarray | None = None
    e_squeeze: np.ndarray | None = None
    signal_mode: str = "c"
    signal_quadrature: str = "amplitude"
    signal_strength: float = 0.0

    def __post_init__(self):
        if self.gamma <= 0:
            raise ValueError("gamma must be positive")
        object.__setattr__(self, "d_couplings", _pairs(self.d_couplings))
        object.__setattr__(self, "e_couplings", _pairs(self.e_couplings))
        for name in ("g_b", "g_bdag", "g_c", "g_cdag"):
            object.__setattr__(self, name, complex(getattr(self, name)))
        object.__setattr__(self, "d_exchange",
                           _square(self.d_exchange, self.n_d, "d_exchange"))
        object.__setattr__(self, "d_squeeze",
                           _square(self.d_squeeze, self.n_d, "d_squeeze"))
        object.__setattr__(self, "e_exchange",
                           _square(self.e_exchange, self.n_e, "e_exchange"))
        object.__setattr__(self, "e_squeeze",
                           _square(self.e_squeeze, self.n_e, "e_squeeze"))
        self.mode_index(self.signal_mode)
        if self.signal_quadrature not in ("amplitude", "phase"):
            raise ValueError("signal_quadrature must be amplitude or phase")

    @property
    def n_d(self) -> int:
        return len(self.d_couplings)

    @property
    def n_e(self) -> int:
        return len(self.e_couplings)

    @property
    def n_modes(self) -> int:
        return 3 + self.n_d + self.n_e

    def mode_index(self, name: str) -> int:
        """Index in the ordering a, b, c, d_1..d_nd, e_1..e_ne."""
        if name == "a":
            return 0
        if name == "b":
            return 1
        if name == "c":
            return 2
        kind, num = name[0], name[1:]
        if kind in ("d", "e") and num.isdigit():
            j = int(num)
            count = self.n_d if kind == "d" else self.n_e
            if 1 <= j <= count:
                return (3 + j - 1) if kind == "d" else (3 + self.n_d + j - 1)
        raise ValueError(f"unknown mode name {name!r}")

    @classmethod
    def pt_symmetric(cls, gamma: float, g: float, omega_prime: float = 0.0,
                     alpha: float = 0.0) -> "ModeNetwork":
        """Balanced network: squeezing a-b and beamsplitter a-c at rate g,
        optionally extended by single-mode chains at rate omega_prime."""
        chains = ((omega_prime, 0.0),) if omega_prime else ()
        return cls(gamma=gamma, g_bdag=g, g_c=g,
                   d_couplings=chains, e_couplings=chains,
                   signal_mode="c", signal_quadrature="amplitude",
                   signal_strength=alpha)


@dataclass(frozen=True)
class ObservableVector:
    """Coefficients of a linear observable O = sum_i coeffs_i x_i."""

    coeffs: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "coeffs",
                           np.asarray(self.coeffs, dtype=complex).reshape(-1))
        if self.coeffs.size % 2:
            raise ValueError("doubled-basis coefficient vector has odd length")

    @property
    def n_modes(self) -> int:
        return self.coeffs.size // 2

    def is_hermitian(self, tol: float = 1e-12) -> bool:
        p = doubled.pair_swap(self.n_modes)
        return bool(np.abs(self.coeffs.conj() - p @ self.coeffs).max() <= tol)


def mode_observable(net: ModeNetwork, name: str,
                    creator: bool = False) -> ObservableVector:
    """Unit observable a_name (or its dagger) over the network's doubled basis."""
    v = np.zeros(2 * net.n_modes, complex)
    v[2 * net.mode_index(name) + (1 if creator else 0)] = 1.0
    return ObservableVector(v)


def quadrature_observable(net: ModeNetwork, name: str,
                          kind: str) -> ObservableVector:
    return ObservableVector(
        quadrature_coefficients(net.n_modes, net.mode_index(name), kind))


def network_hamiltonian(net: ModeNetwork) -> np.ndarray:
    """Hamiltonian coefficient matrix of the network over its doubled basis."""
    n = net.n_modes
    h = np.zeros((2 * n, 2 * n), complex)
    a, b, c = 0, 1, 2
    add_exchange(h, a, b, net.g_b)
    add_pair_creation(h, a, b, net.g_bdag)
    add_exchange(h, a, c, net.g_c)
    add_pair_creation(h, a, c, net.g_cdag)
    for j, (g, g_dag) in enumerate(net.d_couplings):
        add_exchange(h, b, 3 + j, g)
        add_pair_creation(h, b, 3 + j, g_dag)
    for j, (g, g_dag) in enumerate(net.e_couplings):
        add_exchange(h, c, 3 + net.n_d + j, g)
        add_pair_creation(h, c, 3 + net.n_d + j, g_dag)
    for (ex, sq, base) in ((net.d_exchange, net.d_squeeze, 3),
                           (net.e_exchange, net.e_squeeze, 3 + net.n_d)):
        for i in range(ex.shape[0]):
            for j in range(i + 1, ex.shape[1]):
                if ex[i, j]:
                    add_exchange(h, base + i, base + j, ex[i, j], sign=+1.0)
                if sq[i, j]:
                    add_pair_creation(h, base + i, base + j, sq[i, j],
                                      sign=+1.0)
    return h


def network_coupling_row(net: ModeNetwork) -> np.ndarray:
    lam = np.zeros(2 * net.n_modes, complex)
    lam[0] = -np.sqrt(2.0 * net.gamma)
    return lam


def network_drift(net: ModeNetwork):
    """Drift and input matrices (A_net, B_net) of the Langevin dynamics."""
    a, b, _, _ = assemble_dynamics(np.eye(2, dtype=complex),
                                   network_coupling_row(net),
                                   network_hamiltonian(net))
    return a, b


def network_state_space(net: ModeNetwork) -> StateSpace:
    return StateSpace(*assemble_dynamics(np.eye(2, dtype=complex),
                                         network_coupling_row(net),
                                         network_hamiltonian(net)))


def signal_drive(net: ModeNetwork) -> np.ndarray:
    """Inhomogeneous drive column of the classical signal x_c.

    The signal Hamiltonian -alpha * (chosen quadrature) * x_c pushes the
    conjugate quadrature of the chosen mode with strength alpha.
    """
    alpha = net.signal_strength
    m = net.mode_index(net.signal_mode)
    f = np.zeros(2 * net.n_modes, complex)
    if net.signal_quadrature == "amplitude":
        f[2 * m] = 1j * alpha / np.sqrt(2.0)
        f[2 * m + 1] = -1j * alpha / np.sqrt(2.0)
    else:
        f[2 * m] = -alpha / np.sqrt(2.0)
        f[2 * m + 1] = -alpha / np.sqrt(2.0)
    return f


# ---------------------------------------------------------------------------
# Closed-form chain elimination (block-matrix route).
# ---------------------------------------------------------------------------

class AuxBlocks(NamedTuple):
    d_block: np.ndarray   # 2 x 2n coupling of the carrier mode to the chain
    g_block: np.ndarray   # 2n x 2n internal chain coupling matrix
    m_block: np.ndarray   # 2n x 2 solved chain response at this frequency


def _coupling_block(g: complex, g_dag: complex) -> np.ndarray:
    return np.array([[1j * g, -1j * g_dag],
                     [1j * np.conj(g_dag), -1j * np.conj(g)]])


def _chain_data(net: ModeNetwork, chain: str):
    if chain == "d":
        return net.d_couplings, net.d_exchange, net.d_squeeze
    if chain == "e":
        return net.e_couplings, net.e_exchange, net.e_squeeze
    raise ValueError("chain must be 'd' or 'e'")


def aux_block_matrices(net: ModeNetwork, chain: str, omega: float) -> AuxBlocks:
    """Chain block matrices D, G and the solved response M at one frequency.

    The vector ordering is (d_1..d_n; d_1^dag..d_n^dag).  ``m_block`` solves
    ``(-i w I + i G) M = [g_vec, g_dag_vec]``; its rows give the chain
    amplitudes driven by the carrier mode pair.

    Raises
    ------
    ChainResonance
        When ``-i w I + i G`` is singular at this frequency.
    """
    couplings, exchange, squeeze = _chain_data(net, chain)
    n = len(couplings)
    g_vec = np.zeros((2 * n, 1), complex)
    g_dag_vec = np.zeros((2 * n, 1), complex)
    d_block = np.zeros((2, 2 * n), complex)
    for j, (g, g_dag) in enumerate(couplings):
        g_vec[j, 0] = 1j * g
        g_vec[n + j, 0] = -1j * np.conj(g_dag)
        g_dag_vec[j, 0] = 1j * g_dag
        g_dag_vec[n + j, 0] = -1j * np.conj(g)
        d_block[0, j] = g
        d_block[0, n + j] = -g_dag
        d_block[1, j] = np.conj(g_dag)
        d_block[1, n + j] = -np.conj(g)
    g_block = np.zeros((2 * n, 2 * n), complex)
    for j in range(n):
        for i in range(n):
            if i == j:
                continue
            g_block[j, i] = exchange[i, j]
            g_block[j, n + i] = squeeze[i, j]
            g_block[n + j, i] = -np.conj(squeeze[i, j])
            g_block[n + j, n + i] = -np.conj(exchange[i, j])
    if n == 0:
        return AuxBlocks(d_block, g_block, np.zeros((0, 2), complex))
    lhs = -1j * omega * np.eye(2 * n) + 1j * g_block
    sv = np.linalg.svd(lhs, compute_uv=False)
    if sv[-1] <= 1e-12 * max(1.0, sv[0]):
        raise ChainResonance(
            f"{chain}-chain is resonant at frequency {omega}")
    m_block = np.linalg.solve(lhs, np.hstack([g_vec, g_dag_vec]))
    return AuxBlocks(d_block, g_block, m_block)


def aux_transfer(net: ModeNetwork, omega: float):
    """Closed transfer matrices of the b and c modes at one frequency.

    ``T_b = (-i w I - i D M)^-1 [[i g_b, -i g_bdag], [i g_bdag*, -i g_b*]]``
    and its c analogue; the chains enter through their solved M blocks.
    """
    out = {}
    for chain, (g, g_dag) in (("d", (net.g_b, net.g_bdag)),
                              ("e", (net.g_c, net.g_cdag))):
        blocks = aux_block_matrices(net, chain, omega)
        lhs = (-1j * omega * np.eye(2)
               - 1j * blocks.d_block @ blocks.m_block)
        sv = np.linalg.svd(lhs, compute_uv=False)
        if sv[-1] <= 1e-12 * max(1.0, sv[0]):
            raise ChainResonance(
                f"closed {chain}-chain response is resonant at {omega}")
        out[chain] = np.linalg.solve(lhs, _coupling_block(g, g_dag))
    return out["d"], out["e"]


def invariance_matrix(net: ModeNetwork, omega: float) -> np.ndarray:
    """Feedback matrix T_a; the network is hidden where it vanishes."""
    t_b, t_c = aux_transfer(net, omega)
    return (_coupling_block(net.g_b, net.g_bdag) @ t_b
            + _coupling_block(net.g_c, net.g_cdag) @ t_c)


def is_hidden(net: ModeNetwork, grid: FrequencyGrid,
              tol: float = 1e-10) -> bool:
    """True when max over the grid of ||T_a(w)|| stays below ``tol``."""
    worst = 0.0
    for omega in grid.points:
        worst = max(worst, float(np.linalg.norm(
            invariance_matrix(net, omega), 2)))
    return worst < tol


def max_invariance_residual(net: ModeNetwork, grid: FrequencyGrid) -> float:
    return max(float(np.linalg.norm(invariance_matrix(net, omega), 2))
               for omega in grid.points)


# ---------------------------------------------------------------------------
# Drift-based route: conserved observables, full IO relation, signal response.
# ---------------------------------------------------------------------------

def conserved_observables(net) -> list:
    """Orthonormal basis of observables conserved even under the input drive.

    Returns vectors w with w A_net = 0 and w B_net = 0 (as coefficient
    rows), computed from the SVD null space at relative tolerance 1e-10.
    Accepts a :class:`ModeNetwork` or any doubled-basis :class:`StateSpace`.
    """
    if isinstance(net, StateSpace):
        a, b = net.a, net.b
    else:
        a, b = network_drift(net)
    stack = np.vstack([a.T, b.T])
    _, sv, vh = np.linalg.svd(stack)
    cutoff = TOL_NULLSPACE * (sv[0] if sv.size else 1.0)
    null_dim = int(np.sum(sv <= cutoff)) + (stack.shape[1] - sv.size)
    if null_dim == 0:
        return []
    basis = vh.conj()[-null_dim:, :]
    return [ObservableVector(row) for row in basis]


def symplectic_commutator(w1: ObservableVector, w2: ObservableVector) -> complex:
    """Canonical commutator [O1, O2] via the doubled-basis symplectic form."""
    if w1.coeffs.size != w2.coeffs.size:
        raise BasisMismatch("observables live over different doubled bases")
    k = commutation_form(w1.n_modes)
    return complex(w1.coeffs @ k @ w2.coeffs)


def full_network_io(net: ModeNetwork, omega: float) -> np.ndarray:
    """Input-output transfer matrix of the whole network by direct elimination.

    Independent of the T_a block algebra: solves the assembled Langevin
    dynamics in the doubled sideband basis at one frequency.
    """
    ss = network_state_space(net)
    s = -1j * omega
    lhs = s * np.eye(ss.n_states) - ss.a
    sv = np.linalg.svd(lhs, compute_uv=False)
    if sv[-1] <= 1e-13 * max(1.0, sv[0]):
        raise OnResonance(f"network response is resonant at {omega}")
    return ss.c @ np.linalg.solve(lhs, ss.b) + ss.d


def _chain_rate(net: ModeNetwork) -> float:
    if net.n_d == 0:
        return 0.0
    return abs(net.d_couplings[0][0])


def _require_pt(net: ModeNetwork) -> tuple:
    """Validate the balanced (hidden) topology and return (gamma, g, w', alpha)."""
    g = net.g_bdag
    ok = (abs(net.g_b) == 0 and abs(net.g_cdag) == 0
          and abs(net.g_c - g) <= 1e-12 * max(1.0, abs(g))
          and abs(g.imag) <= 1e-12 * max(1.0, abs(g)))
    ok = ok and net.n_d == net.n_e and net.n_d <= 1
    if net.n_d == 1:
        wd, wd_dag = net.d_couplings[0]
        we, we_dag = net.e_couplings[0]
        ok = ok and abs(wd_dag) == 0 and abs(we_dag) == 0
        ok = ok and abs(wd - we) <= 1e-12 * max(1.0, abs(wd))
        ok = ok and abs(complex(wd).imag) <= 1e-12 * max(1.0, abs(wd))
    ok = ok and net.signal_mode == "c" and net.signal_quadrature == "amplitude"
    if not ok:
        raise ValueError(
            "operation requires the balanced configuration: g_b = g_cdag = 0, "
            "g_c = g_bdag real, symmetric single-mode chains, signal on the "
            "amplitude quadrature of mode c")
    return net.gamma, float(g.real), _chain_rate(net), net.signal_strength


def _guard_resonance(omega: float, omega_prime: float) -> None:
    if abs(omega ** 2 - omega_prime ** 2) < 1e-9 * (1.0 + omega_prime ** 2):
        raise OnResonance(
            f"frequency {omega} sits on the shifted resonance {omega_prime}")


def signal_response_shift(net: ModeNetwork, omega: float) -> complex:
    """Conserved-quadrature response (Y_c - Y_b)/sqrt(2) per unit signal.

    Solved from the assembled network dynamics with the signal drive; for
    the balanced network this reduces to ``i alpha w / (sqrt2 (w^2 - w'^2))``
    and to ``i alpha / (sqrt2 w)`` without chains.

    Raises
    ------
    OnResonance
        Within the scale-invariant guard around ``w = +-w'``.
    """
    _, _, omega_prime, _ = _require_pt(net)
    _guard_resonance(omega, omega_prime)
    return y_minus_response(net, omega)


def y_minus_response(net: ModeNetwork, omega: float) -> complex:
    """Generic (Y_c - Y_b)/sqrt(2) response per unit signal, any topology."""
    a, _ = network_drift(net)
    f = signal_drive(net)
    lhs = -1j * omega * np.eye(a.shape[0]) - a
    sv = np.linalg.svd(lhs, compute_uv=False)
    if sv[-1] <= 1e-13 * max(1.0, sv[0]):
        raise OnResonance(f"network dynamics are resonant at {omega}")
    response = np.linalg.solve(lhs, f)
    y_minus = (quadrature_coefficients(net.n_modes, net.mode_index("c"), "phase")
               - quadrature_coefficients(net.n_modes, net.mode_index("b"),
                                         "phase")) / np.sqrt(2.0)
    return complex(y_minus @ response)


def final_io_relation(net: ModeNetwork, omega: float):
    """Phase-quadrature reflection and signal transfer of the balanced network.

    Eliminates the conserved-sector variables (Y_minus, Q_minus) and the
    cavity phase quadrature in the frequency domain: the probe couples to
    the cavity through the residual interaction -g X_a Y_minus, and the
    output carries the pi-shifted reflection so the bare response is
    -(w - i gamma)/(w + i gamma).  Returns ``(noise_tf, signal_tf)``.
    """
    gamma, g, omega_prime, alpha = _require_pt(net)
    _guard_resonance(omega, omega_prime)
    # Variables (Y_a, Y_minus, Q_minus); the cavity quadrature is driven by
    # -g Y_minus, the coupling sign inherited from the mode-basis network.
    drift = np.array([[-gamma, -g, 0.0],
                      [0.0, 0.0, -omega_prime],
                      [0.0, omega_prime, 0.0]], dtype=complex)
    lhs = -1j * omega * np.eye(3) - drift
    b_in = np.array([np.sqrt(2.0 * gamma), 0.0, 0.0], dtype=complex)
    f_sig = np.array([0.0, alpha / np.sqrt(2.0), 0.0], dtype=complex)
    sol = np.linalg.solve(lhs, np.column_stack([b_in, f_sig]))
    noise_tf = complex(-1.0 + np.sqrt(2.0 * gamma) * sol[0, 0])
    signal_tf = complex(np.sqrt(2.0 * gamma) * sol[0, 1])
    return noise_tf, signal_tf
