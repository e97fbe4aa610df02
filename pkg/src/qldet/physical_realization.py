"""Physically realizable realizations and open-oscillator extraction.

A state space over the doubled (a, a^dag) basis is physically realizable
when it satisfies::

    A J + J A^dag + B J B^dag = 0
    J C^dag + B J D^dag = 0            with J = diag(1, -1) per mode.

Starting from a realizable diagonal quadrature transfer matrix, the
synthesis pipeline de-dimensionalizes, builds a canonical realization,
reduces it to minimal order, converts the input/output pair to the sideband
picture (where the J conditions are the correct commutation-preservation
statement), solves the linear constraint system for the Hermitian matrix X,
factors X = T J T^dag and applies T as a similarity transformation.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from . import doubled
from .doubled import (QUADRATURE_FROM_SIDEBAND, assemble_dynamics,
                      j_matrix, pair_swap, symmetrize_hamiltonian)
from .errors import (NonUniqueSolutionWarning, NoSolution, NotPhysical,
                     NotRealizable, UnsupportedDimension, WrongInertia)
from .statespace import (StateSpace, canonical_realization,
                         minimal_realization, similarity_transform,
                         tf_distance)
from .tf_core import (FrequencyGrid, QuadratureTransferMatrix,
                      RationalFunction, check_realness,
                      check_symplectic_realizability)

TOL_CONSTRAINT = 1e-9
TOL_FACTOR = 1e-10


@dataclass(frozen=True)
class RealizabilityCertificate:
    """Residual norms of the two realizability matrix equations."""

    residual1: float
    residual2: float
    j_matrix: np.ndarray

    def passes(self, tol: float = 1e-10) -> bool:
        return self.residual1 < tol and self.residual2 < tol


@dataclass(frozen=True)
class OpenOscillator:
    """Generalized open oscillator (S, L, H) over the doubled basis.

    ``s`` is the 2x2 doubled scattering matrix, ``l`` the coefficient row of
    the coupling operator L over (a_1, a_1^dag, ...), and ``h`` the Hermitian
    pair-structured Hamiltonian coefficient matrix with H = (1/2) x^dag h x.
    """

    s: np.ndarray
    l: np.ndarray
    h: np.ndarray

    @property
    def n_modes(self) -> int:
        return self.l.size // 2

    def mode_gamma(self, mode: int) -> float:
        """Half the commutator-weighted coupling strength of one mode.

        For a clean annihilation coupling L = nu * a this is |nu|^2 / 2,
        i.e. the cavity half-bandwidth gamma.
        """
        return float((abs(self.l[2 * mode]) ** 2
                      - abs(self.l[2 * mode + 1]) ** 2) / 2.0)

    def mode_chi(self, mode: int) -> float:
        """Single-mode squeezing strength |chi| read off the Hamiltonian."""
        return float(abs(self.h[2 * mode, 2 * mode + 1]))

    def mode_detuning(self, mode: int) -> float:
        return float(self.h[2 * mode, 2 * mode].real)

    def exchange_coupling(self, i: int, j: int) -> float:
        """Beamsplitter-like coupling magnitude between modes i and j."""
        return float(abs(self.h[2 * i, 2 * j]))

    def to_state_space(self) -> StateSpace:
        a, b, c, d = assemble_dynamics(self.s, self.l, self.h)
        return StateSpace(a, b, c, d)


@dataclass(frozen=True)
class NetworkDecomposition:
    """One-mode oscillators plus their direct coupling Hamiltonian.

    ``oscillators[k]`` describes mode k alone (its 2x2 blocks of S-like,
    L and H data); ``direct_hamiltonian`` holds the cross-mode coefficient
    blocks; ``wiring`` lists the series-product order (outputs of earlier
    entries feed later entries).
    """

    oscillators: tuple
    direct_hamiltonian: np.ndarray
    wiring: tuple


def solve_realizability_constraint(ss: StateSpace,
                                   tol: float = TOL_CONSTRAINT) -> np.ndarray:
    """Solve A'X + X A'^dag + B' J B'^dag = 0 and X C'^dag + B' J D'^dag = 0.

    Both matrix equations are stacked into one linear system in vec(X) and
    solved jointly by least squares, which yields a clean inconsistency
    signal and the minimum-norm solution when the system is rank deficient
    (flagged with :class:`NonUniqueSolutionWarning`).

    Raises
    ------
    NoSolution
        When the joint system is inconsistent at tolerance ``tol``.
    """
    n = ss.n_states
    if n % 2:
        raise ValueError("state dimension must be even (quadrature pairs)")
    if n == 0:
        return np.zeros((0, 0), complex)
    j = j_matrix(ss.n_inputs // 2) if ss.n_inputs % 2 == 0 else None
    if j is None or ss.n_inputs != 2:
        j = j_matrix(1)
    eye = np.eye(n)
    # vec(A'X) = (I (x) A') vec(X); vec(X M) = (M^T (x) I) vec(X).
    rows1 = np.kron(eye, ss.a) + np.kron(ss.a.conj(), eye)
    rhs1 = -(ss.b @ j @ ss.b.conj().T).reshape(-1, order="F")
    rows2 = np.kron(ss.c.conj(), eye)
    rhs2 = -(ss.b @ j @ ss.d.conj().T).reshape(-1, order="F")
    mat = np.vstack([rows1, rows2])
    rhs = np.concatenate([rhs1, rhs2])
    x_vec, _, rank, _ = np.linalg.lstsq(mat, rhs, rcond=None)
    if rank < n * n:
        warnings.warn(
            "realizability constraint system is rank deficient; "
            "returning the minimum-norm X", NonUniqueSolutionWarning)
    x = x_vec.reshape((n, n), order="F")
    asym = np.abs(x - x.conj().T).max()
    if asym > 1e-8 * max(1.0, np.abs(x).max()):
        warnings.warn(
            f"solved X deviates from Hermitian by {asym:.2e}; symmetrizing",
            NonUniqueSolutionWarning)
    x = 0.5 * (x + x.conj().T)
    scale = max(1.0, float(np.abs(rhs).max()))
    res = float(np.abs(mat @ x.reshape(-1, order="F") - rhs).max())
    if res > tol * scale:
        raise NoSolution(
            f"realizability constraints are inconsistent (residual {res:.2e}); "
            "the starting realization does not admit a physical similarity")
    return x


def factor_indefinite(x: np.ndarray, tol: float = TOL_FACTOR) -> np.ndarray:
    """Factor a Hermitian X with inertia (n/2, n/2) as X = T J T^dag.

    Eigenvectors are scaled by sqrt|eigenvalue| and routed to the +1/-1
    slots of J by eigenvalue sign.  When X is purely imaginary (the case
    produced by the synthesis pipeline, whose pre-realizations are real),
    the negative-eigenvalue columns are taken as conjugates of the positive
    ones; this keeps the transformed system in a proper doubled basis.

    Raises
    ------
    WrongInertia
        When the eigenvalue signs of X are incompatible with J.
    """
    x = np.asarray(x, dtype=complex)
    n = x.shape[0]
    if n == 0:
        return np.zeros((0, 0), complex)
    if n % 2:
        raise WrongInertia("odd dimension cannot match J = diag(1, -1, ...)")
    if np.abs(x - x.conj().T).max() > 1e-8 * max(1.0, np.abs(x).max()):
        raise ValueError("X must be Hermitian")
    x = 0.5 * (x + x.conj().T)
    lam, vec = np.linalg.eigh(x)
    scale = np.abs(lam).max()
    if scale == 0.0 or np.any(np.abs(lam) <= 1e-12 * scale):
        raise WrongInertia("X is singular; no invertible T with X = T J T^dag")
    pos = np.where(lam > 0)[0]
    neg = np.where(lam < 0)[0]
    if pos.size != n // 2 or neg.size != n // 2:
        raise WrongInertia(
            f"inertia ({pos.size}+, {neg.size}-) incompatible with J")
    # Descending eigenvalue magnitude gives a deterministic mode order.
    pos = pos[np.argsort(-lam[pos])]
    neg = neg[np.argsort(lam[neg])]
    t = np.zeros((n, n), complex)
    purely_imaginary = np.abs(x.real).max() <= 1e-10 * max(1.0, scale)
    for k in range(n // 2):
        vplus = vec[:, pos[k]] * np.sqrt(lam[pos[k]])
        t[:, 2 * k] = vplus
        if purely_imaginary:
            t[:, 2 * k + 1] = vplus.conj()
        else:
            t[:, 2 * k + 1] = vec[:, neg[k]] * np.sqrt(-lam[neg[k]])
    j = j_matrix(n // 2)
    if np.abs(t @ j @ t.conj().T - x).max() > 1e-8 * max(1.0, scale):
        # Conjugate pairing failed (degenerate structure); fall back.
        for k in range(n // 2):
            t[:, 2 * k + 1] = vec[:, neg[k]] * np.sqrt(-lam[neg[k]])
    return t


def verify_physical(ss: StateSpace) -> RealizabilityCertificate:
    """Residual norms of the two realizability equations for ``ss``."""
    n = ss.n_states
    if n % 2:
        raise ValueError("state dimension must be even (mode pairs)")
    j = j_matrix(n // 2)
    jf = j_matrix(max(1, ss.n_inputs // 2))
    if n == 0:
        return RealizabilityCertificate(0.0, 0.0, j)
    res1 = ss.a @ j + j @ ss.a.conj().T + ss.b @ jf @ ss.b.conj().T
    res2 = j @ ss.c.conj().T + ss.b @ jf @ ss.d.conj().T
    return RealizabilityCertificate(
        float(np.linalg.norm(res1, 2)), float(np.linalg.norm(res2, 2)), j)


def _to_sideband_io(ss: StateSpace) -> StateSpace:
    """Rewrite the 2x2 input/output pair from quadratures to sidebands."""
    u = QUADRATURE_FROM_SIDEBAND
    return StateSpace(ss.a, ss.b @ u, u.conj().T @ ss.c,
                      u.conj().T @ ss.d @ u)


def _dedimensionalize(rf: RationalFunction, scale: float) -> RationalFunction:
    gain = rf.gain * scale ** (len(rf.zeros) - len(rf.poles))
    return RationalFunction(zeros=tuple(z / scale for z in rf.zeros),
                            poles=tuple(p / scale for p in rf.poles),
                            gain=gain)


def make_physically_realizable(tf: QuadratureTransferMatrix,
                               tol: float = TOL_CONSTRAINT) -> StateSpace:
    """Synthesize a physically realizable sideband-basis state space for ``tf``.

    Pipeline: validate the symplectic and realness conditions, rescale
    frequencies by the largest pole/zero magnitude, build the canonical
    realization, reduce to minimal order, convert the input/output pair to
    the sideband picture, solve for X, factor X = T J T^dag, apply T, fix
    the overall reflection phase so that D has a positive trace, and undo
    the frequency scaling (A by the scale, B and C by its square root).

    The result satisfies :func:`verify_physical` and reproduces ``tf`` in
    the quadrature picture up to a global sign.
    """
    if not check_realness(tf):
        raise NotRealizable("transfer matrix fails the realness conditions")
    grid = FrequencyGrid.default_for(tf, n=120)
    sym = check_symplectic_realizability(tf, grid, tol=1e-8)
    if not sym.passed:
        raise NotRealizable(
            f"transfer matrix fails the symplectic condition "
            f"(residual {sym.max_residual:.2e})")

    mags = [abs(r) for r in tf.all_roots() if abs(r) > 0]
    scale = max(mags) if mags else 1.0
    tf_dd = QuadratureTransferMatrix(_dedimensionalize(tf.g11, scale),
                                     _dedimensionalize(tf.g22, scale))
    ss = minimal_realization(canonical_realization(tf_dd))
    if ss.n_states:
        ss = _to_sideband_io(ss)
        x = solve_realizability_constraint(ss, tol=tol)
        t = factor_indefinite(x)
        ss = similarity_transform(ss, t)
    else:
        ss = _to_sideband_io(ss)
    # pi phase shift for the input-output reflection, applied when it
    # normalizes the direct-scattering trace to be positive.
    if ss.d.trace().real < 0:
        ss = StateSpace(ss.a, ss.b, -ss.c, -ss.d)
    ss = StateSpace(scale * ss.a, np.sqrt(scale) * ss.b,
                    np.sqrt(scale) * ss.c, ss.d)
    # Deterministic mode gauge: couplings real negative, port mode last.
    ss = canonicalize_oscillator(ss)
    cert = verify_physical(ss)
    if not cert.passes(1e-8 * max(1.0, scale)):
        raise NoSolution(
            f"synthesis did not reach a realizable system "
            f"(residuals {cert.residual1:.2e}, {cert.residual2:.2e})")
    return ss


def extract_open_oscillator(ss: StateSpace,
                            tol: float = 1e-8) -> OpenOscillator:
    """Recover (S, L, H) from a physically realizable doubled state space.

    S is read from D, the coupling row of L from the first row of C, and the
    Hamiltonian coefficient matrix from the drift once the damping
    contribution (the -L^dag L half) is removed.  The reconstruction is
    verified against the input.

    Raises
    ------
    NotPhysical
        When the certificate fails or C/D lack the doubled structure.
    """
    n = ss.n_states
    if n % 2:
        raise NotPhysical("state dimension must be even")
    cert = verify_physical(ss)
    scale = max(1.0, float(np.abs(ss.a).max()) if n else 1.0)
    if not cert.passes(tol * scale):
        raise NotPhysical(
            f"realizability certificate fails (residuals "
            f"{cert.residual1:.2e}, {cert.residual2:.2e})")
    n_modes = n // 2
    if n == 0:
        return OpenOscillator(s=ss.d.copy(), l=np.zeros(0, complex),
                              h=np.zeros((0, 0), complex))
    p = pair_swap(n_modes)
    lam = ss.c
    pf = pair_swap(1)
    if np.abs(lam[1] - (lam[0].conj() @ p)).max() > tol * max(1.0, np.abs(lam).max()):
        raise NotPhysical(
            "C rows are not conjugate partners; state space is not in a "
            "doubled (a, a^dag) basis")
    if np.abs(ss.d - pf @ ss.d.conj() @ pf).max() > tol * max(1.0, np.abs(ss.d).max()):
        raise NotPhysical("D lacks the doubled scattering structure")
    lam_row = lam[0]
    j = j_matrix(n_modes)
    m = np.outer(lam_row.conj(), lam_row)
    a_damp = -0.5 * j @ (m - p @ m.conj() @ p)
    h = 1j * j @ (ss.a - a_damp)
    h_sym = symmetrize_hamiltonian(h)
    if np.abs(h - h_sym).max() > tol * max(1.0, np.abs(h).max()):
        raise NotPhysical(
            "recovered Hamiltonian is not Hermitian/pair-structured")
    osc = OpenOscillator(s=ss.d.copy(), l=lam_row.copy(), h=h_sym)
    rebuilt = osc.to_state_space()
    for got, want in ((rebuilt.a, ss.a), (rebuilt.b, ss.b),
                      (rebuilt.c, ss.c), (rebuilt.d, ss.d)):
        if np.abs(got - want).max() > 1e-9 * max(1.0, np.abs(want).max()):
            raise NotPhysical("reconstruction from (S, L, H) does not match")
    return osc


def _mode_permutation(n_modes: int, order) -> np.ndarray:
    perm = np.zeros((2 * n_modes, 2 * n_modes), complex)
    for new, old in enumerate(order):
        perm[2 * old, 2 * new] = 1.0
        perm[2 * old + 1, 2 * new + 1] = 1.0
    return perm


def _mode_phase(n_modes: int, phases) -> np.ndarray:
    diag = []
    for th in phases:
        diag.extend([np.exp(1j * th), np.exp(-1j * th)])
    return np.diag(diag)


def _concentration_rotation(osc: OpenOscillator) -> np.ndarray | None:
    """Passive 2-mode rotation moving all port coupling onto the second mode.

    Only applies when both couplings are pure annihilation terms; returns
    the doubled rotation matrix, or None when not applicable.
    """
    if osc.n_modes != 2:
        return None
    lam = osc.l
    if max(abs(lam[1]), abs(lam[3])) > 1e-10 * max(1.0, np.abs(lam).max()):
        return None
    v = np.array([lam[0], lam[2]])
    norm = np.linalg.norm(v)
    if norm == 0 or min(abs(v)) <= 1e-12 * norm:
        return None
    u = np.zeros((2, 2), complex)
    u[:, 0] = np.array([-v[1], v[0]]) / norm
    u[:, 1] = v.conj() / norm
    w = np.zeros((4, 4), complex)
    for i in range(2):
        for j in range(2):
            w[2 * i, 2 * j] = u[i, j]
            w[2 * i + 1, 2 * j + 1] = np.conj(u[i, j])
    return w


def canonicalize_oscillator(ss: StateSpace) -> StateSpace:
    """Gauge-fix a realizable system: port-coupled modes last, phases pinned.

    For two-mode systems whose coupling is spread over both modes by pure
    annihilation terms, a passive rotation first concentrates the coupling
    onto a single mode.  Mode phases are then chosen so that each nonzero
    coupling coefficient is real and negative (the -sqrt(2 gamma)
    convention) and each uncoupled mode has a real, positive exchange
    coupling to the port mode.  All steps are J-preserving similarity
    transformations, so realizability and the transfer function are
    untouched.
    """
    osc = extract_open_oscillator(ss)
    n_modes = osc.n_modes
    if n_modes == 0:
        return ss
    rot = _concentration_rotation(osc)
    if rot is not None:
        ss = similarity_transform(ss, rot)
        osc = extract_open_oscillator(ss)
    weight = [abs(osc.l[2 * k]) ** 2 + abs(osc.l[2 * k + 1]) ** 2
              for k in range(n_modes)]
    order = sorted(range(n_modes), key=lambda k: (weight[k], k))
    ss = similarity_transform(ss, _mode_permutation(n_modes, order))
    osc = extract_open_oscillator(ss)
    port = n_modes - 1
    phases = [0.0] * n_modes
    for k in range(n_modes):
        nu = osc.l[2 * k]
        if abs(nu) > 1e-10:
            # The transform scales the coupling coefficient by e^{i th}.
            phases[k] = np.pi - np.angle(nu)
    for k in range(n_modes):
        if abs(osc.l[2 * k]) <= 1e-10:
            coup = osc.h[2 * k, 2 * port]
            if abs(coup) > 1e-12:
                # h[2k, 2j] maps to e^{-i th_k} h e^{+i th_j}; pin it positive.
                phases[k] = np.angle(coup) + phases[port]
    ss = similarity_transform(ss, _mode_phase(n_modes, phases))
    return ss


def decompose_network(ss: StateSpace) -> NetworkDecomposition:
    """Split a realizable 1- or 2-mode system into one-mode open oscillators.

    Returns the per-mode oscillators, the direct-coupling Hamiltonian
    coefficient matrix (cross-mode blocks of the full Hamiltonian) and the
    series wiring order.  The input is canonicalized first so the
    decomposition is deterministic: uncoupled modes come first and the
    port-coupled mode is last, matching a series product whose final element
    carries the external coupling.

    Raises
    ------
    UnsupportedDimension
        For systems with more than two modes.
    """
    n_modes = ss.n_states // 2
    if n_modes > 2:
        raise UnsupportedDimension(
            "network separation is implemented for at most 2 modes")
    ss = canonicalize_oscillator(ss)
    osc = extract_open_oscillator(ss)
    h_direct = osc.h.copy()
    oscillators = []
    for k in range(n_modes):
        sl = slice(2 * k, 2 * k + 2)
        h_direct[sl, sl] = 0.0
        # The first oscillator in the wiring carries the composite scattering.
        s_local = osc.s.copy() if k == 0 else np.eye(2, dtype=complex)
        oscillators.append(OpenOscillator(s=s_local, l=osc.l[sl].copy(),
                                          h=osc.h[sl, sl].copy()))
    # The series product contributes Im(L_2^dag S_2 L_1) to the composite
    # Hamiltonian; the direct coupling is what remains of the cross blocks.
    if n_modes == 2:
        lam1 = np.zeros(2 * n_modes, complex)
        lam2 = np.zeros(2 * n_modes, complex)
        lam1[0:2] = osc.l[0:2]
        lam2[2:4] = osc.l[2:4]
        interference = (np.outer(lam2.conj(), lam1)
                        - np.outer(lam1.conj(), lam2)) / 2j
        h_direct -= _quadratic_from_normal(interference)
    return NetworkDecomposition(oscillators=tuple(oscillators),
                                direct_hamiltonian=h_direct,
                                wiring=tuple(range(n_modes)))


def recombine_network(dec: NetworkDecomposition) -> StateSpace:
    """Reassemble the full state space from a network decomposition.

    The oscillators are composed in the series order of ``wiring``; with a
    single port-coupled oscillator the series product reduces to placing the
    local Hamiltonians on the diagonal and the direct coupling on the
    off-diagonal blocks.
    """
    n_modes = len(dec.oscillators)
    h = np.array(dec.direct_hamiltonian, dtype=complex, copy=True)
    lam = np.zeros(2 * n_modes, complex)
    s_total = np.eye(2, dtype=complex)
    for idx in dec.wiring:
        osc = dec.oscillators[idx]
        sl = slice(2 * idx, 2 * idx + 2)
        h[sl, sl] += osc.h
        # Series product: L <- L_k + S_k L_prev, S <- S_k S_prev, plus the
        # interference Hamiltonian Im(L_k^dag S_k L_prev).
        prev = lam.copy()
        contrib = np.zeros(2 * n_modes, complex)
        contrib[sl] = osc.l
        s_scalar = osc.s[0, 0]
        interference = (s_scalar * np.outer(contrib.conj(), prev)
                        - np.conj(s_scalar) * np.outer(prev.conj(), contrib)) / (2j)
        h += _quadratic_from_normal(interference)
        lam = contrib + s_scalar * prev
        s_total = osc.s @ s_total
    return StateSpace(*assemble_dynamics(s_total, lam, symmetrize_hamiltonian(h)))


def _quadratic_from_normal(m: np.ndarray) -> np.ndarray:
    """Coefficient matrix of x^dag m x re-expressed in the 1/2 x^dag h x form."""
    n_modes = m.shape[0] // 2
    p = pair_swap(n_modes)
    return m + p @ m.T @ p


def squeezer_state_space(gamma: float, chi: float) -> StateSpace:
    """Closed-form realizable internal-squeezing cavity (one mode).

    Equals the synthesized realization of the first-order pair with
    alpha = gamma + chi, beta = gamma - chi.
    """
    a = np.array([[-gamma, chi], [chi, -gamma]], dtype=complex)
    b = np.sqrt(2.0 * gamma) * np.eye(2, dtype=complex)
    return StateSpace(a, b, -b, np.eye(2, dtype=complex))


def expander_state_space(gamma: float, chi: float,
                         omega_s: float) -> StateSpace:
    """Closed-form realizable coupled-cavity expander (two modes).

    Mode 0 is the undamped arm, mode 1 the damped, internally squeezed
    port mode; the modes exchange quanta at the sloshing rate omega_s.
    """
    a = np.array([[0, 0, -1j * omega_s, 0],
                  [0, 0, 0, 1j * omega_s],
                  [-1j * omega_s, 0, -gamma, -chi],
                  [0, 1j * omega_s, -chi, -gamma]], dtype=complex)
    b = np.zeros((4, 2), complex)
    b[2, 0] = np.sqrt(2.0 * gamma)
    b[3, 1] = np.sqrt(2.0 * gamma)
    return StateSpace(a, b, -b.T, np.eye(2, dtype=complex))
