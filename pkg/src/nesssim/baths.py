"""Boundary Lindblad baths.

Two bath models drive the chain ends:

* single-spin bath: two jump operators ``sqrt(G+) s+`` and ``sqrt(G-) s-``
  with rates ``G+- = exp(-+mu)``, whose unique fixed point is the one-spin
  state ~ exp(-mu sz) with magnetization -tanh(mu);
* two-spin bath: a generator with an arbitrary prescribed two-site fixed
  point rho_B and all fifteen remaining eigenvalues equal to -gamma (the
  fastest relaxation at fixed spectral norm).  It is built in the eigenbasis
  of rho_B, where only the diagonal (-1) and three column-0 entries are
  nonzero, then rotated back with the orthogonal operator-space image of the
  diagonalizing unitary.

``gamma`` always enters by scaling the generator (equivalently tau -> gamma
tau in the propagators).
"""

import warnings
from dataclasses import dataclass

import numpy as np

from .pauli import PAULI, PAULI2, dissipator_superop, hermitian_coeffs

_SPLUS = np.array([[0, 1], [0, 0]], dtype=np.complex128)
_SMINUS = np.array([[0, 0], [1, 0]], dtype=np.complex128)


@dataclass(frozen=True)
class BathSpec:
    kind: str                 # 'single_spin' | 'two_spin'
    gamma: float
    mu_left: float = 0.0
    mu_right: float = 0.0
    T_left: float = 0.0
    T_right: float = 0.0
    target_left: np.ndarray | None = None    # explicit rho_B overrides
    target_right: np.ndarray | None = None

    def __post_init__(self):
        if self.kind not in ("single_spin", "two_spin"):
            raise ValueError(f"unknown bath kind {self.kind!r}")
        if not (np.isfinite(self.gamma) and self.gamma > 0):
            raise ValueError("gamma must be positive")
        if self.kind == "two_spin":
            for side, T, tgt in (("left", self.T_left, self.target_left),
                                 ("right", self.T_right, self.target_right)):
                if tgt is None and not T > 0:
                    raise ValueError(
                        f"two-spin bath needs T_{side} > 0 or an explicit target")


def single_spin_rates(mu):
    """(Gamma+, Gamma-) = (exp(-mu), exp(+mu)); their product is 1."""
    return np.exp(-mu), np.exp(mu)


def single_spin_lindblad_ops(mu):
    gp, gm = single_spin_rates(mu)
    return [np.sqrt(gp) * _SPLUS, np.sqrt(gm) * _SMINUS]


def single_spin_bath_generator(mu, gamma):
    """4x4 generator of the magnetization bath, fixed point ~ (1,0,0,-tanh mu)."""
    return dissipator_superop(single_spin_lindblad_ops(mu), gamma)


def single_spin_bath_propagator(mu, gamma, tau):
    """Closed-form bath propagator in the Pauli basis (tau scaled by gamma)."""
    if tau <= 0:
        raise ValueError("tau must be positive")
    gp, gm = single_spin_rates(mu)
    t = gamma * tau
    e1 = np.exp(-(gp + gm) * t)
    e2 = np.exp(-2.0 * (gp + gm) * t)
    out = np.zeros((4, 4))
    out[0, 0] = 1.0
    out[1, 1] = e1
    out[2, 2] = e1
    out[3, 3] = e2
    out[3, 0] = (gp - gm) / (gp + gm) * (1.0 - e2)
    return out


def two_spin_lindblad_ops(diag_probs):
    """The sixteen jump operators targeting a diagonal two-site state.

    ``diag_probs`` are the eigenvalues d_0..d_3 of rho_B in the computational
    basis (left site least significant).  Kept mainly as an independent route
    for validating the direct generator construction below.
    """
    d = np.asarray(diag_probs, dtype=np.float64)
    r = [_SPLUS * 2.0, _SMINUS * 2.0, PAULI[0] + PAULI[3], PAULI[0] - PAULI[3]]
    ops = []
    for i in range(4):
        for j in range(4):
            m = (i % 2) + 2 * (j % 2)
            ops.append(np.sqrt(d[m] / 32.0) * np.kron(r[j], r[i]))
    return ops


def _diagonal_two_spin_generator(d):
    """Generator in the eigenbasis of rho_B: diagonal -1 plus three column-0
    entries that pin the fixed point (valid for unit-trace d)."""
    g = -np.eye(16)
    g[0, 0] = 0.0
    g[15, 0] = d[0] - d[1] - d[2] + d[3]   # sz sz
    g[12, 0] = d[0] + d[1] - d[2] - d[3]   # 1  sz
    g[3, 0] = d[0] - d[1] + d[2] - d[3]    # sz 1
    return g


def operator_basis_rotation(v):
    """Orthogonal matrix R with R_{a,b} = tr(V^dag sigma^a V sigma^b)/4,
    the coefficient-space image of X -> V X V^dag."""
    rot = np.empty((16, 16))
    vd = v.conj().T
    for b in range(16):
        m = v @ PAULI2[b] @ vd
        rot[:, b] = np.real(np.einsum("aij,ji->a", PAULI2, m)) / 4.0
    return rot


def two_spin_bath_generator(rho_b, gamma):
    """16x16 generator with unique fixed point rho_b, other eigenvalues -gamma."""
    rho_b = np.asarray(rho_b, dtype=np.complex128)
    if rho_b.shape != (4, 4):
        raise ValueError("rho_b must be 4x4")
    if np.max(np.abs(rho_b - rho_b.conj().T)) > 1e-10:
        raise ValueError("rho_b must be Hermitian")
    if abs(np.trace(rho_b).real - 1.0) > 1e-10:
        raise ValueError("rho_b must have unit trace")
    d, v = np.linalg.eigh(rho_b)
    if d.min() < -1e-10:
        raise ValueError(f"rho_b is not positive semidefinite (min eig {d.min():.3e})")
    if d.min() < 1e-12:
        warnings.warn("rho_b has (near-)zero eigenvalues; relaxation onto the "
                      "pure directions may be slow", stacklevel=2)
    d = np.clip(d, 0.0, None)
    # eigh gives rho = v d v^dag, i.e. V = v^dag in rho = V^dag d V
    rot = operator_basis_rotation(v.conj().T)
    gen = gamma * (rot.T @ _diagonal_two_spin_generator(d) @ rot)
    gen[0] = 0.0
    return gen


def two_spin_fixed_point_coeffs(rho_b):
    """Pauli coefficient vector of rho_B (real, c_0 = 1/4)."""
    return hermitian_coeffs(rho_b, tol=1e-10)


def thermal_two_site_state(h, T):
    """Gibbs state exp(-h/T)/tr exp(-h/T) of a two-site energy density."""
    if not T > 0:
        raise ValueError("temperature must be positive")
    h = np.asarray(h, dtype=np.complex128)
    if np.max(np.abs(h - h.conj().T)) > 1e-12 * max(1.0, np.abs(h).max()):
        raise ValueError("h must be Hermitian")
    w, v = np.linalg.eigh(h)
    g = np.exp(-(w - w.min()) / T)
    return (v * (g / g.sum())) @ v.conj().T


def resolve_two_spin_targets(spec, left_term, right_term):
    """(rho_left, rho_right) for a two-spin bath: explicit overrides win,
    otherwise Gibbs states of the edge bond terms at the bath temperatures."""
    left = spec.target_left
    if left is None:
        left = thermal_two_site_state(left_term, spec.T_left)
    right = spec.target_right
    if right is None:
        right = thermal_two_site_state(right_term, spec.T_right)
    return left, right
