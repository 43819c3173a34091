import numpy as np
import pytest

from nesssim.models import (ModelSpec, build_bond_terms, build_tilted_ising_bond_terms,
                            build_xxz_bond_terms, pair, staggered_fields)
from nesssim.pauli import PAULI

_ID, _SX, _SY, _SZ = PAULI


def embed_two_site(op, l, n):
    return np.kron(np.eye(2 ** (n - l - 2)), np.kron(op, np.eye(2 ** l)))


def embed_one_site(op, l, n):
    return np.kron(np.eye(2 ** (n - l - 1)), np.kron(op, np.eye(2 ** l)))


def xxz_dense(n, delta, fields):
    """Independent dense assembly of the XXZ Hamiltonian."""
    h = np.zeros((2 ** n, 2 ** n), dtype=complex)
    for l in range(n - 1):
        h += embed_two_site(np.kron(_SX, _SX) + np.kron(_SY, _SY)
                            + delta * np.kron(_SZ, _SZ), l, n)
    for l in range(n):
        h += fields[l] * embed_one_site(_SZ, l, n)
    return h


def tilted_dense(n, hx, hz):
    h = np.zeros((2 ** n, 2 ** n), dtype=complex)
    for l in range(n - 1):
        h += -2.0 * embed_two_site(np.kron(_SZ, _SZ), l, n)
    for l in range(n):
        w = 1.0 if 0 < l < n - 1 else 0.5
        h += w * (hx * embed_one_site(_SX, l, n) + hz * embed_one_site(_SZ, l, n))
    return h


class TestXxz:
    def test_no_field_bond_term(self):
        spec = ModelSpec("xxz", 4, delta=0.5)
        terms = build_xxz_bond_terms(spec)
        expect = pair(_SX, _SX) + pair(_SY, _SY) + 0.5 * pair(_SZ, _SZ)
        for t in terms:
            assert np.abs(t - expect).max() < 1e-15

    def test_two_sites_full_field_weights(self):
        spec = ModelSpec("xxz", 2, delta=1.0, fields=np.array([0.3, -0.7]))
        (term,) = build_xxz_bond_terms(spec)
        expect = (pair(_SX, _SX) + pair(_SY, _SY) + pair(_SZ, _SZ)
                  + 0.3 * pair(_SZ, _ID) - 0.7 * pair(_ID, _SZ))
        assert np.abs(term - expect).max() < 1e-15

    @pytest.mark.parametrize("n,delta", [(2, 1.0), (4, 0.5), (6, 1.5)])
    def test_reassembly_matches_global(self, n, delta, rng):
        fields = rng.normal(size=n)
        spec = ModelSpec("xxz", n, delta=delta, fields=fields)
        total = sum(embed_two_site(t, l, n)
                    for l, t in enumerate(build_xxz_bond_terms(spec)))
        assert np.abs(total - xxz_dense(n, delta, fields)).max() < 1e-12

    def test_staggered_field_pattern(self):
        h = staggered_fields(6)
        assert np.allclose(h, [0, -0.5, 0, -0.5, 0, -0.5])
        spec = ModelSpec("xxz", 6, delta=0.5, fields=h)
        total = sum(embed_two_site(t, l, 6)
                    for l, t in enumerate(build_xxz_bond_terms(spec)))
        assert np.abs(total - xxz_dense(6, 0.5, h)).max() < 1e-12

    def test_terms_hermitian(self, rng):
        spec = ModelSpec("xxz", 5, delta=1.5, fields=rng.normal(size=5))
        for t in build_xxz_bond_terms(spec):
            assert np.abs(t - t.conj().T).max() < 1e-15

    def test_wrong_kind_rejected(self):
        with pytest.raises(ValueError):
            build_xxz_bond_terms(ModelSpec("tilted_ising", 4))


class TestTiltedIsing:
    def test_default_chaotic_point(self):
        spec = ModelSpec("tilted_ising", 4)
        assert spec.hx == 3.375 and spec.hz == 2.0

    def test_bond_term_formula(self):
        spec = ModelSpec("tilted_ising", 3, hx=3.375, hz=2.0)
        terms = build_tilted_ising_bond_terms(spec)
        expect = (-2.0 * pair(_SZ, _SZ)
                  + 0.5 * (3.375 * pair(_SX, _ID) + 2.0 * pair(_SZ, _ID))
                  + 0.5 * (3.375 * pair(_ID, _SX) + 2.0 * pair(_ID, _SZ)))
        for t in terms:
            assert np.abs(t - expect).max() < 1e-15

    def test_classical_limit(self):
        spec = ModelSpec("tilted_ising", 4, hx=0.0, hz=0.0)
        for t in build_tilted_ising_bond_terms(spec):
            assert np.abs(t + 2.0 * pair(_SZ, _SZ)).max() < 1e-15

    @pytest.mark.parametrize("n", [3, 5])
    def test_reassembly_halves_edge_fields(self, n):
        spec = ModelSpec("tilted_ising", n)
        total = sum(embed_two_site(t, l, n)
                    for l, t in enumerate(build_bond_terms(spec)))
        assert np.abs(total - tilted_dense(n, 3.375, 2.0)).max() < 1e-12

    def test_wrong_kind_rejected(self):
        with pytest.raises(ValueError):
            build_tilted_ising_bond_terms(ModelSpec("xxz", 4, delta=1.0))


class TestModelSpec:
    def test_rejects_single_site(self):
        with pytest.raises(ValueError):
            ModelSpec("xxz", 1, delta=1.0)

    def test_rejects_bad_kind(self):
        with pytest.raises(ValueError):
            ModelSpec("ising", 4)

    def test_rejects_wrong_field_length(self):
        with pytest.raises(ValueError):
            ModelSpec("xxz", 4, delta=1.0, fields=np.zeros(3))

    def test_rejects_non_finite(self):
        with pytest.raises(ValueError):
            ModelSpec("xxz", 4, delta=np.inf)
