import numpy as np
import pytest

from nesssim.mps import SuperketMps


def embed_superop(mat, pos, n):
    """Embed a local 4x4 (site) or 16x16 (bond) superoperator into the global
    4^n coefficient space, site 0 least significant."""
    width = 1 if mat.shape[0] == 4 else 2
    return np.kron(np.eye(4 ** (n - pos - width)),
                   np.kron(mat, np.eye(4 ** pos)))


def dense_gate_product(gates, n):
    """Dense matrix of a gate sequence applied in order."""
    out = np.eye(4 ** n)
    for g in gates:
        out = embed_superop(g.mat, g.pos, n) @ out
    return out


def random_mps(rng, n, d, identity_one=True):
    """Random real superket MPS with interior bond dimension d."""
    tensors = []
    dl = 1
    for i in range(n):
        dr = 1 if i == n - 1 else d
        tensors.append(rng.normal(size=(dl, 4, dr)))
        dl = dr
    state = SuperketMps(tensors)
    if identity_one:
        c = state.identity_coefficient()
        if abs(c) < 1e-6:   # re-draw is overkill; just shift the first tensor
            state.tensors[0][0, 0, 0] += 1.0
            c = state.identity_coefficient()
        state.tensors[0] /= c
    return state


def random_density_matrix(rng, dim):
    a = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    rho = a @ a.conj().T
    return rho / np.trace(rho).real


@pytest.fixture
def rng():
    return np.random.default_rng(20260808)
