"""Doubled-basis conventions shared by the synthesis and network modules.

A system of ``n`` bosonic modes is described by the column vector
``x = (a_1, a_1^dag, ..., a_n, a_n^dag)`` (annihilation/creation pairs,
interleaved).  In this basis the commutation matrix ``[x_i, x_j^dag]`` is
``J = diag(1, -1, ...)`` and ``[x_i, x_j]`` is ``K = J P`` with ``P`` the
pair-swap permutation.

Quadratic Hamiltonians are stored as coefficient matrices ``h`` with
``H = (1/2) x^dag h x`` where ``h`` is Hermitian and pair-structured
(``h == P h^T P``).  Couplings to the single external field are stored as
the row vector ``lam`` of ``L = lam @ x``.  The drift/input/output matrices
of the Langevin dynamics then follow from a single assembly rule, reused by
the realization, sensitivity and hidden-mode code paths.
"""

from __future__ import annotations

import numpy as np

# Quadratures (X, Y) from sidebands (a, a^dag): (X, Y)^T = U (a, a^dag)^T.
QUADRATURE_FROM_SIDEBAND = np.array([[1.0, 1.0], [-1.0j, 1.0j]]) / np.sqrt(2.0)


def j_matrix(n_modes: int) -> np.ndarray:
    """Commutation matrix diag(1, -1) per mode, interleaved."""
    return np.diag(np.tile([1.0, -1.0], n_modes)).astype(complex)


def pair_swap(n_modes: int) -> np.ndarray:
    """Permutation exchanging each mode with its conjugate partner."""
    p = np.zeros((2 * n_modes, 2 * n_modes))
    for k in range(n_modes):
        p[2 * k, 2 * k + 1] = 1.0
        p[2 * k + 1, 2 * k] = 1.0
    return p.astype(complex)


def commutation_form(n_modes: int) -> np.ndarray:
    """Matrix of plain commutators K_ij = [x_i, x_j]."""
    return j_matrix(n_modes) @ pair_swap(n_modes)


def doubled_coupling(lam_row: np.ndarray) -> np.ndarray:
    """Stack (L, L^dag) rows from the single coupling row of L."""
    lam_row = np.asarray(lam_row, dtype=complex).reshape(1, -1)
    n_modes = lam_row.shape[1] // 2
    return np.vstack([lam_row, lam_row.conj() @ pair_swap(n_modes)])


def assemble_dynamics(scattering: np.ndarray, lam_row: np.ndarray,
                      h: np.ndarray):
    """Build (A, B, C, D) of the Langevin dynamics from (S, L, H) data.

    Parameters
    ----------
    scattering : (2, 2) doubled scattering matrix S.
    lam_row : (2n,) coefficient row of the coupling operator L.
    h : (2n, 2n) Hamiltonian coefficient matrix (Hermitian, pair-structured).

    Returns
    -------
    Tuple (a, b, c, d) with ``xdot = a x + b u`` and ``y = c x + d u`` in the
    doubled sideband basis.  Conventions reproduce the tuned-cavity relations
    ``adot = -gamma a + sqrt(2 gamma) a_in`` and
    ``a_out = a_in - sqrt(2 gamma) a`` for ``L = -sqrt(2 gamma) a``, S = I.
    """
    lam_row = np.asarray(lam_row, dtype=complex).reshape(-1)
    h = np.asarray(h, dtype=complex)
    n_modes = lam_row.size // 2
    j = j_matrix(n_modes)
    p = pair_swap(n_modes)
    jf = j_matrix(1)

    m = np.outer(lam_row.conj(), lam_row)
    a = -1j * j @ h - 0.5 * j @ (m - p @ m.conj() @ p)
    lam = doubled_coupling(lam_row)
    b = -j @ lam.conj().T @ jf @ scattering
    c = lam
    d = np.asarray(scattering, dtype=complex)
    return a, b, c, d


def quadrature_coefficients(n_modes: int, mode: int, kind: str) -> np.ndarray:
    """Coefficient vector of an amplitude/phase quadrature over the doubled basis.

    ``amplitude`` is X = (a + a^dag)/sqrt(2); ``phase`` is
    Y = (a - a^dag)/(sqrt(2) i).
    """
    if not 0 <= mode < n_modes:
        raise ValueError(f"mode index {mode} out of range for {n_modes} modes")
    v = np.zeros(2 * n_modes, dtype=complex)
    if kind == "amplitude":
        v[2 * mode] = 1.0 / np.sqrt(2.0)
        v[2 * mode + 1] = 1.0 / np.sqrt(2.0)
    elif kind == "phase":
        v[2 * mode] = 1.0 / (np.sqrt(2.0) * 1j)
        v[2 * mode + 1] = -1.0 / (np.sqrt(2.0) * 1j)
    else:
        raise ValueError("quadrature kind must be 'amplitude' or 'phase'")
    return v


def pair_structured(mat: np.ndarray, tol: float = 1e-8) -> bool:
    """True when conj(M) == P M P within ``tol`` (relative)."""
    mat = np.asarray(mat, dtype=complex)
    n_modes = mat.shape[0] // 2
    p = pair_swap(n_modes)
    scale = max(1.0, np.abs(mat).max())
    return np.abs(mat.conj() - p @ mat @ p).max() <= tol * scale


def symmetrize_hamiltonian(h: np.ndarray) -> np.ndarray:
    """Project a quadratic coefficient matrix onto Hermitian pair-structured form."""
    h = np.asarray(h, dtype=complex)
    n_modes = h.shape[0] // 2
    p = pair_swap(n_modes)
    h = 0.5 * (h + h.conj().T)
    return 0.5 * (h + p @ h.T @ p)


def add_exchange(h: np.ndarray, i: int, j: int, g: complex,
                 sign: float = -1.0) -> None:
    """Add a beamsplitter-like term  sign * g * (a_i a_j^dag + h.c.)  in place.

    ``sign=-1`` matches the minus-sign convention of mode-to-port couplings;
    inter-auxiliary couplings use ``sign=+1``.
    """
    if i == j:
        raise ValueError("exchange term requires two distinct modes")
    g = complex(g)
    h[2 * i, 2 * j] += sign * np.conj(g)
    h[2 * j, 2 * i] += sign * g
    h[2 * i + 1, 2 * j + 1] += sign * g
    h[2 * j + 1, 2 * i + 1] += sign * np.conj(g)


def add_pair_creation(h: np.ndarray, i: int, j: int, g: complex,
                      sign: float = -1.0) -> None:
    """Add a squeezing-like term  sign * g * (a_i a_j + h.c.)  in place (i != j)."""
    if i == j:
        raise ValueError("use add_single_mode_squeeze for self terms")
    g = complex(g)
    h[2 * i, 2 * j + 1] += sign * np.conj(g)
    h[2 * j, 2 * i + 1] += sign * np.conj(g)
    h[2 * j + 1, 2 * i] += sign * g
    h[2 * i + 1, 2 * j] += sign * g


def add_single_mode_squeeze(h: np.ndarray, i: int, kappa: complex) -> None:
    """Add  kappa * a_i a_i + conj(kappa) * a_i^dag a_i^dag  in place."""
    kappa = complex(kappa)
    h[2 * i, 2 * i + 1] += 2.0 * np.conj(kappa)
    h[2 * i + 1, 2 * i] += 2.0 * kappa


def add_detuning(h: np.ndarray, i: int, omega: float) -> None:
    """Add  omega * a_i^dag a_i  (plus its reordered mirror) in place."""
    h[2 * i, 2 * i] += float(omega)
    h[2 * i + 1, 2 * i + 1] += float(omega)
