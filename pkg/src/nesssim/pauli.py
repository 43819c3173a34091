"""Pauli-basis algebra on one and two spins 1/2.

Density operators are expanded over products of Pauli matrices
``sigma^0..sigma^3 = (1, sx, sy, sz)``; with the inner product
``<a|b> = tr(a^dag b)/2^m`` the Pauli strings form an orthonormal basis, so a
Hermitian operator has a real coefficient vector.  Superoperators (commutators,
dissipators, their exponentials) are stored as real matrices acting on those
coefficient vectors.

Two-site index convention used everywhere in this package: the flattened Pauli
index of a pair is ``a = s1 + 4*s2`` with the *first* (left) site least
significant, and the matching computational-basis matrix is
``kron(op_site2, op_site1)``.
"""

import numpy as np
from scipy.linalg import expm

PAULI = np.array(
    [
        [[1, 0], [0, 1]],
        [[0, 1], [1, 0]],
        [[0, -1j], [1j, 0]],
        [[1, 0], [0, -1]],
    ],
    dtype=np.complex128,
)
PAULI.flags.writeable = False

# kron(second site, first site): index a = s1 + 4*s2
PAULI2 = np.array([np.kron(PAULI[a // 4], PAULI[a % 4]) for a in range(16)])
PAULI2.flags.writeable = False


def _build_mult_tables():
    idx = np.zeros((4, 4), dtype=np.int64)
    phase = np.zeros((4, 4), dtype=np.complex128)
    for a in range(4):
        for b in range(4):
            prod = PAULI[a] @ PAULI[b]
            for c in range(4):
                ph = np.trace(PAULI[c].conj().T @ prod) / 2.0
                if abs(ph) > 0.5:
                    idx[a, b] = c
                    phase[a, b] = complex(np.round(ph.real) + 1j * np.round(ph.imag))
                    break
    return idx, phase


_MULT_IDX, _MULT_PHASE = _build_mult_tables()


def pauli_multiply(a, b):
    """Product of two Pauli matrices: sigma^a sigma^b = phase * sigma^c.

    Returns (phase, c) with phase in {1, -1, 1j, -1j}.
    """
    if not (0 <= a <= 3 and 0 <= b <= 3):
        raise ValueError(f"Pauli indices must be in 0..3, got ({a}, {b})")
    return _MULT_PHASE[a, b], int(_MULT_IDX[a, b])


def _basis_for(dim):
    if dim == 2:
        return PAULI
    if dim == 4:
        return PAULI2
    raise ValueError(f"local operators must be 2x2 or 4x4, got dim {dim}")


def operator_to_coeffs(op):
    """Expansion coefficients of a 2x2 or 4x4 operator over Pauli strings.

    c_a = tr(sigma^a^dag op) / dim.  The vector is complex; it is real (up to
    rounding) exactly when ``op`` is Hermitian.
    """
    op = np.asarray(op)
    basis = _basis_for(op.shape[0])
    if op.shape != basis[0].shape:
        raise ValueError(f"operator must be square, got shape {op.shape}")
    return np.einsum("aij,ji->a", basis, op) / op.shape[0]


def coeffs_to_operator(c):
    """Inverse of :func:`operator_to_coeffs`: sum_a c_a sigma^a."""
    c = np.asarray(c)
    if c.shape == (4,):
        return np.tensordot(c, PAULI, axes=(0, 0))
    if c.shape == (16,):
        return np.tensordot(c, PAULI2, axes=(0, 0))
    raise ValueError(f"coefficient vector must have length 4 or 16, got {c.shape}")


def hermitian_coeffs(op, tol=1e-12):
    """Real coefficient vector of a Hermitian operator (validated)."""
    c = operator_to_coeffs(op)
    if np.max(np.abs(c.imag)) > tol:
        raise ValueError("operator is not Hermitian: complex Pauli coefficients")
    return np.ascontiguousarray(c.real)


def _check_hermitian(h, what="operator"):
    h = np.asarray(h, dtype=np.complex128)
    scale = max(1.0, np.abs(h).max())
    if np.max(np.abs(h - h.conj().T)) > 1e-12 * scale:
        raise ValueError(f"{what} must be Hermitian")
    return h


def hamiltonian_superop(h):
    """Unitary-part generator X -> -i[h, X] as a real matrix in the Pauli basis.

    The result is real and antisymmetric; row 0 vanishes (trace preservation).
    """
    h = _check_hermitian(h, "Hamiltonian term")
    basis = _basis_for(h.shape[0])
    comm = -1j * (h @ basis - basis @ h)  # (b, d, d)
    m = np.einsum("aij,bji->ab", basis, comm) / h.shape[0]
    if np.max(np.abs(m.imag)) > 1e-12 * max(1.0, np.abs(m.real).max()):
        raise ValueError("Hamiltonian superoperator has complex entries")
    return _zero_trace_row(np.ascontiguousarray(m.real))


def dissipator_superop(ls, gamma):
    """Dissipator X -> gamma * sum_k ([L_k X, L_k^dag] + [L_k, X L_k^dag]).

    Equals gamma * sum_k (2 L_k X L_k^dag - {L_k^dag L_k, X}); the matrix is
    real in the Pauli basis and its identity row is zero.
    """
    if gamma < 0:
        raise ValueError("gamma must be non-negative")
    ls = [np.asarray(L, dtype=np.complex128) for L in ls]
    if not ls:
        raise ValueError("need at least one Lindblad operator")
    dim = ls[0].shape[0]
    for L in ls:
        if L.shape != (dim, dim):
            raise ValueError("Lindblad operators must share one dimension")
    basis = _basis_for(dim)
    acc = np.zeros((len(basis), dim, dim), dtype=np.complex128)
    for L in ls:
        Ld = L.conj().T
        LdL = Ld @ L
        acc += 2.0 * (L @ basis @ Ld) - LdL @ basis - basis @ LdL
    m = gamma * np.einsum("aij,bji->ab", basis, acc) / dim
    if np.max(np.abs(m.imag)) > 1e-12 * max(1.0, np.abs(m.real).max()):
        raise ValueError("dissipator has complex entries in the Pauli basis")
    return _zero_trace_row(np.ascontiguousarray(m.real))


def _zero_trace_row(m):
    """Pin the identity row to exact zeros (trace preservation holds
    analytically; this removes rounding junk so it holds entrywise)."""
    junk = np.abs(m[0]).max()
    if junk > 1e-10 * max(1.0, np.abs(m).max()):
        raise ValueError(f"generator violates trace preservation ({junk:.2e})")
    m[0] = 0.0
    return m


def superop_exponential(m, tau):
    """Propagator exp(m * tau) of a local generator.

    Normal generators go through an eigendecomposition, everything else through
    scaling-and-squaring (scipy expm).  If row 0 of ``m`` vanishes (trace
    preservation) it is pinned to e_0^T in the result.
    """
    m = np.asarray(m, dtype=np.float64)
    if not np.isfinite(m).all() or not np.isfinite(tau):
        raise ValueError("non-finite generator or step")
    scale = np.abs(m).max()
    normal = scale == 0.0 or (
        np.max(np.abs(m @ m.T - m.T @ m)) < 1e-12 * scale * scale
    )
    if normal:
        w, v = np.linalg.eig(m)
        e = (v * np.exp(w * tau)) @ np.linalg.inv(v)
        e = np.ascontiguousarray(e.real)
    else:
        e = expm(m * tau)
    if not np.any(m[0]):
        e[0] = 0.0
        e[0, 0] = 1.0
    return e
