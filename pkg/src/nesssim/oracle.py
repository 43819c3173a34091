"""Brute-force reference for small chains (n <= 6).

The full Liouvillean is assembled densely along a route independent of the
TEBD engine: the global Hamiltonian is built by direct kron embedding of the
model formulas (not from the shared bond terms), the Lindblad operators are
embedded at the chain ends, the generator is vectorized in the computational
basis and then conjugated into the Pauli-string basis, where it is real.

Coefficient vectors here follow the same convention as the MPS: index
``s = sum_i s_i 4^i`` with site 0 least significant, identity coefficient
normalized to 1 so expectation values are coefficient ratios.
"""

from dataclasses import dataclass
from functools import reduce

import numpy as np
from scipy.integrate import solve_ivp

from .baths import single_spin_lindblad_ops, resolve_two_spin_targets, \
    two_spin_lindblad_ops
from .models import build_bond_terms
from .pauli import PAULI, hermitian_coeffs

MAX_ORACLE_SITES = 6


@dataclass
class DenseLiouvillean:
    n: int
    matrix: np.ndarray  # real, 4^n x 4^n, Pauli-string basis


def embed_operator(op, first_site, n):
    """Embed a 2^k-dimensional operator on sites first_site..first_site+k-1
    into the 2^n space (site 0 least significant)."""
    k = int(np.log2(op.shape[0]))
    below = 2 ** first_site
    above = 2 ** (n - first_site - k)
    return np.kron(np.eye(above), np.kron(op, np.eye(below)))


def global_hamiltonian(model):
    """Dense 2^n x 2^n Hamiltonian assembled directly from the model formulas."""
    n = model.n
    dim = 2 ** n
    h = np.zeros((dim, dim), dtype=np.complex128)
    if model.kind == "xxz":
        sx, sy, sz = PAULI[1], PAULI[2], PAULI[3]
        for l in range(n - 1):
            for op in (sx, sy):
                h += embed_operator(np.kron(op, op), l, n)
            h += model.delta * embed_operator(np.kron(sz, sz), l, n)
        if model.fields is not None:
            for l in range(n):
                h += model.fields[l] * embed_operator(sz, l, n)
    else:
        sx, sz = PAULI[1], PAULI[3]
        for l in range(n - 1):
            h += -2.0 * embed_operator(np.kron(sz, sz), l, n)
        for l in range(n):
            w = 1.0 if 0 < l < n - 1 else 0.5
            h += w * (model.hx * embed_operator(sx, l, n)
                      + model.hz * embed_operator(sz, l, n))
    return h


def global_lindblad_ops(model, bath):
    """Lindblad operators embedded into the 2^n space."""
    n = model.n
    ops = []
    if bath.kind == "single_spin":
        for site, mu in ((0, bath.mu_left), (n - 1, bath.mu_right)):
            for L in single_spin_lindblad_ops(mu):
                ops.append(embed_operator(L, site, n))
    else:
        if n < 4:
            raise ValueError("two-spin baths need n >= 4")
        terms = build_bond_terms(model)
        left, right = resolve_two_spin_targets(bath, terms[0], terms[-1])
        for first, rho_b in ((0, left), (n - 2, right)):
            d, u = np.linalg.eigh(rho_b)
            d = np.clip(d, 0.0, None)
            for L in two_spin_lindblad_ops(d):
                ops.append(embed_operator(u @ L @ u.conj().T, first, n))
    return ops


def pauli_string_matrix(s, n):
    """Dense matrix of the Pauli string with flat index s (site 0 least
    significant)."""
    digits = [(s >> (2 * i)) & 3 for i in range(n)]
    return reduce(np.kron, [PAULI[d] for d in reversed(digits)])


def _string_basis(n):
    dim = 2 ** n
    basis = np.empty((4 ** n, dim * dim), dtype=np.complex128)
    for s in range(4 ** n):
        basis[s] = pauli_string_matrix(s, n).reshape(-1)
    return basis.T  # columns are vec(sigma^s), row-major vec


def dense_liouvillean(model, bath):
    """Full Lindblad generator in the Pauli-string basis (real matrix)."""
    n = model.n
    if n > MAX_ORACLE_SITES:
        raise ValueError(f"dense oracle refuses n={n} > {MAX_ORACLE_SITES}")
    dim = 2 ** n
    eye = np.eye(dim)
    h = global_hamiltonian(model)
    # row-major vec: vec(A rho B) = (A kron B^T) vec(rho)
    sup = -1j * (np.kron(h, eye) - np.kron(eye, h.T))
    for L in global_lindblad_ops(model, bath):
        LdL = L.conj().T @ L
        sup += bath.gamma * (2.0 * np.kron(L, L.conj())
                             - np.kron(LdL, eye) - np.kron(eye, LdL.T))
    basis = _string_basis(n)
    m = basis.conj().T @ sup @ basis / dim
    if np.max(np.abs(m.imag)) > 1e-9 * max(1.0, np.abs(m.real).max()):
        raise RuntimeError("Liouvillean has complex entries in the Pauli basis")
    return DenseLiouvillean(n=n, matrix=np.ascontiguousarray(m.real))


def coeffs_to_density_matrix(coeffs, n):
    """rho = sum_s c_s sigma^s / 2^n (unit trace when c_0 = 1)."""
    dim = 2 ** n
    rho = np.zeros((dim, dim), dtype=np.complex128)
    for s in np.nonzero(np.abs(coeffs) > 0)[0]:
        rho += coeffs[s] * pauli_string_matrix(int(s), n)
    return rho / dim


def ness_nullspace(liou, gap_tol=1e-8, psd_tol=1e-8):
    """Coefficient vector of the steady state (identity coefficient 1).

    The null vector comes from an SVD (far more accurate than a general
    eigensolve); a second near-zero singular value means a degenerate steady
    state and is reported.  The reconstructed state must be Hermitian
    positive semidefinite.
    """
    _, s, vt = np.linalg.svd(liou.matrix)
    scale = max(s[0], 1.0)
    if s[-2] < gap_tol * scale:
        raise RuntimeError(
            f"steady state is degenerate (two singular values below "
            f"{gap_tol * scale:.2e}); NESS is not unique")
    vec = vt[-1]
    if abs(vec[0]) < 1e-12:
        raise RuntimeError("null vector has no identity component")
    coeffs = vec / vec[0]
    rho = coeffs_to_density_matrix(coeffs, liou.n)
    if np.max(np.abs(rho - rho.conj().T)) > 1e-8:
        raise RuntimeError("reconstructed NESS is not Hermitian")
    low = np.linalg.eigvalsh(rho).min()
    if low < -psd_tol:
        raise RuntimeError(f"reconstructed NESS is not PSD (min eig {low:.2e})")
    return coeffs


def time_integrate(liou, coeffs0, t, rtol=1e-10, atol=1e-12):
    """exp(L t) applied to a coefficient vector by adaptive integration."""
    if t == 0.0:
        return np.array(coeffs0, dtype=np.float64)
    m = liou.matrix
    sol = solve_ivp(lambda _, y: m @ y, (0.0, t), np.asarray(coeffs0, float),
                    method="DOP853", rtol=rtol, atol=atol, t_eval=[t])
    if not sol.success:
        raise RuntimeError(f"oracle integration failed: {sol.message}")
    return sol.y[:, -1]


def liouvillean_spectrum(liou):
    """All eigenvalues (complex); meant for n <= 5."""
    if liou.n > 5:
        raise ValueError("dense eigensolve limited to n <= 5")
    return np.linalg.eigvals(liou.matrix)


# ----------------------------------------------------------------------
# observables evaluated directly on coefficient vectors

def string_index(string, n):
    s = 0
    for site, p in string.items():
        if not 0 <= site < n:
            raise IndexError(f"site {site} out of range")
        s += p * 4 ** site
    return s


def expect_from_coeffs(coeffs, string, n):
    return coeffs[string_index(string, n)] / coeffs[0]


def spin_profile_from_coeffs(coeffs, n):
    return np.array([expect_from_coeffs(coeffs, {l: 3}, n) for l in range(n)])


def spin_current_from_coeffs(coeffs, n):
    out = np.empty(n - 1)
    for l in range(n - 1):
        out[l] = (expect_from_coeffs(coeffs, {l: 1, l + 1: 2}, n)
                  - expect_from_coeffs(coeffs, {l: 2, l + 1: 1}, n))
    return out


def energy_profile_from_coeffs(coeffs, bond_terms, n):
    out = np.empty(n - 1)
    for l, term in enumerate(bond_terms):
        hc = hermitian_coeffs(term)
        val = 0.0
        for a in range(16):
            if hc[a] != 0.0:
                val += hc[a] * expect_from_coeffs(
                    coeffs, {l: a % 4, l + 1: a // 4}, n)
        out[l] = val
    return out


def energy_current_from_coeffs(coeffs, n, hx):
    out = np.empty(n - 2)
    for l in range(1, n - 1):
        out[l - 1] = 2.0 * hx * (
            expect_from_coeffs(coeffs, {l - 1: 3, l: 2}, n)
            - expect_from_coeffs(coeffs, {l: 2, l + 1: 3}, n))
    return out


def product_state_coeffs_dense(local_vectors):
    """Dense coefficient vector of a product state (site 0 least significant)."""
    acc = np.array([1.0])
    for v in local_vectors:
        v = np.asarray(v, dtype=np.float64)
        acc = np.kron(v / v[0], acc)
    return acc
