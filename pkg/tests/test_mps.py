import numpy as np
import pytest
from conftest import embed_superop, random_mps

from nesssim.baths import single_spin_bath_propagator
from nesssim.mps import (StateCollapsedError, SuperketMps,
                         interpolating_potentials, product_state_coeffs)


class TestProductState:
    def test_maximally_mixed(self):
        st = SuperketMps.from_local_coeffs([[1, 0, 0, 0]] * 5)
        assert st.bond_dims == [1, 1, 1, 1]
        for l in range(5):
            for a in (1, 2, 3):
                assert st.expect_pauli_string({l: a}) == 0.0

    def test_interpolating_ramp(self):
        mus = interpolating_potentials(8, 0.22, -0.22)
        st = SuperketMps.from_local_coeffs(product_state_coeffs(mus))
        for l, mu in enumerate(mus):
            assert abs(st.expect_pauli_string({l: 3}) + np.tanh(mu)) < 1e-14
        assert abs(st.identity_coefficient() - 1.0) < 1e-14

    def test_single_site_spin_down(self):
        st = SuperketMps.from_local_coeffs([[1, 0, 0, -1]])
        assert st.expect_pauli_string({0: 3}) == -1.0

    def test_rejects_traceless_factor(self):
        with pytest.raises(ValueError):
            SuperketMps.from_local_coeffs([[0, 0, 0, 1]])


class TestOneSiteGate:
    def test_identity_gate_tensor_equal(self):
        st = SuperketMps.from_local_coeffs(product_state_coeffs([0.1, 0.2, 0.3]))
        st.canonicalize(1)
        before = [t.copy() for t in st.tensors]
        st.apply_one_site_gate(1, np.eye(4))
        for a, b in zip(before, st.tensors):
            assert np.array_equal(a, b)

    def test_bath_propagator_row_action(self):
        # one application of the closed-form bath gate to (1,0,0,m)
        m0, mu, gamma, tau = -0.4, 0.3, 1.0, 0.05
        st = SuperketMps.from_local_coeffs([[1, 0, 0, m0], [1, 0, 0, 0]])
        gate = single_spin_bath_propagator(mu, gamma, tau)
        st.apply_one_site_gate(0, gate)
        gp, gm = np.exp(-mu), np.exp(mu)
        decay = np.exp(-2 * (gp + gm) * tau)
        expect = m0 * decay + (gp - gm) / (gp + gm) * (1 - decay)
        assert abs(st.expect_pauli_string({0: 3}) - expect) < 1e-14

    def test_repeated_bath_drives_to_fixed_point(self):
        mu = 0.8
        st = SuperketMps.from_local_coeffs([[1, 0, 0, 0.9], [1, 0, 0, 0]])
        gate = single_spin_bath_propagator(mu, 1.0, 0.1)
        for _ in range(600):
            st.apply_one_site_gate(0, gate)
        assert abs(st.expect_pauli_string({0: 3}) + np.tanh(mu)) < 1e-12
        assert st.expect_pauli_string({1: 3}) == 0.0

    def test_index_range(self):
        st = SuperketMps.from_local_coeffs([[1, 0, 0, 0]] * 2)
        with pytest.raises(IndexError):
            st.apply_one_site_gate(2, np.eye(4))


class TestTwoSiteGate:
    def test_identity_gate_preserves_state(self, rng):
        st = random_mps(rng, 4, 3)
        before = st.to_dense_coeffs()
        dw = st.apply_two_site_gate(1, np.eye(16), dmax=64, trunc_eps=0.0)
        assert dw < 1e-15
        assert np.abs(st.to_dense_coeffs() - before).max() < 1e-12

    def test_rank_one_bond_never_truncates(self, rng):
        st = SuperketMps.from_local_coeffs(product_state_coeffs([0.2, -0.1, 0.3]))
        g = rng.normal(size=(16, 16))
        dw = st.apply_two_site_gate(0, g, dmax=16, trunc_eps=0.0)
        assert dw == 0.0   # rank <= 4 from a product state

    def test_matches_dense_application(self, rng):
        st = random_mps(rng, 5, 4)
        dense = st.to_dense_coeffs()
        g = rng.normal(size=(16, 16))
        st.apply_two_site_gate(2, g, dmax=256, trunc_eps=0.0)
        ref = embed_superop(g, 2, 5) @ dense
        scale = np.abs(ref).max()
        assert np.abs(st.to_dense_coeffs() - ref).max() < 1e-12 * scale

    def test_discarded_weight_matches_norm_loss(self, rng):
        st = random_mps(rng, 6, 8)
        st.canonicalize(3)
        g = rng.normal(size=(16, 16))
        full = st.copy()
        full.apply_two_site_gate(3, g, dmax=10 ** 9, trunc_eps=0.0)
        trunc = st.copy()
        dw = trunc.apply_two_site_gate(3, g, dmax=5, trunc_eps=0.0)
        loss = 1.0 - trunc.norm_squared() / full.norm_squared()
        assert abs(dw - loss) < 1e-12

    def test_eps_truncation_policy(self, rng):
        st = random_mps(rng, 6, 8)
        st.canonicalize(2)
        dw = st.apply_two_site_gate(2, np.eye(16), dmax=10 ** 9, trunc_eps=1e-4)
        assert 0.0 <= dw <= 1e-4

    def test_schmidt_vectors_normalized_after_gate(self, rng):
        st = random_mps(rng, 5, 6)
        g = rng.normal(size=(16, 16))
        st.apply_two_site_gate(1, g, dmax=8, trunc_eps=0.0)
        lam = st.lambdas[1]
        assert abs(np.sum(lam ** 2) - 1.0) < 1e-12
        assert np.all(np.diff(lam) <= 1e-15) and lam.min() >= 0.0

    def test_tensors_stay_real(self, rng):
        st = random_mps(rng, 4, 4)
        st.apply_two_site_gate(1, rng.normal(size=(16, 16)), 16, 1e-12)
        for t in st.tensors:
            assert t.dtype == np.float64

    def test_gate_shape_checked(self, rng):
        st = random_mps(rng, 4, 3)
        with pytest.raises(ValueError):
            st.apply_two_site_gate(1, np.eye(4), 16, 0.0)
        with pytest.raises(IndexError):
            st.apply_two_site_gate(3, np.eye(16), 16, 0.0)


class TestCanonicalForm:
    def test_canonicalize_preserves_observables(self, rng):
        st = random_mps(rng, 6, 5)
        strings = [{0: 3}, {2: 1, 3: 2}, {1: 2, 4: 1}, {5: 3}]
        before = [st.expect_pauli_string(s) for s in strings]
        st.canonicalize(3)
        after = [st.expect_pauli_string(s) for s in strings]
        assert np.abs(np.array(before) - after).max() < 1e-10

    def test_orthogonality_about_center(self, rng):
        st = random_mps(rng, 6, 5)
        c = 2
        st.canonicalize(c)
        for i in range(c):
            t = st.tensors[i]
            m = t.reshape(-1, t.shape[2])
            assert np.abs(m.T @ m - np.eye(t.shape[2])).max() < 1e-10
        for i in range(c + 1, 6):
            t = st.tensors[i]
            m = t.reshape(t.shape[0], -1)
            assert np.abs(m @ m.T - np.eye(t.shape[0])).max() < 1e-10

    def test_random_gauge_invariance(self, rng):
        st = random_mps(rng, 5, 4)
        ref = {(1, 2): st.expect_pauli_string({1: 1, 2: 2}),
               (0,): st.expect_pauli_string({0: 3})}
        # insert random invertible matrices and inverses on each bond
        for b in range(4):
            g = rng.normal(size=(st.tensors[b].shape[2],) * 2)
            g += np.eye(g.shape[0]) * 3.0
            gi = np.linalg.inv(g)
            st.tensors[b] = np.einsum("lpr,rk->lpk", st.tensors[b], g)
            st.tensors[b + 1] = np.einsum("kl,lpr->kpr", gi, st.tensors[b + 1])
        st.center = None
        st.canonicalize(2)
        assert abs(st.expect_pauli_string({1: 1, 2: 2}) - ref[(1, 2)]) < 1e-10
        assert abs(st.expect_pauli_string({0: 3}) - ref[(0,)]) < 1e-10

    def test_product_state_canonical_everywhere(self):
        st = SuperketMps.from_local_coeffs(product_state_coeffs([0.3, 0.1, -0.2]))
        for c in range(3):
            st.canonicalize(c)
            assert st.center == c


class TestSchmidtAndOsee:
    def test_product_state_trivial_spectrum(self):
        st = SuperketMps.from_local_coeffs(product_state_coeffs([0.5, -0.5, 0.2]))
        for cut in range(2):
            assert np.allclose(st.schmidt_spectrum(cut), [1.0])
            assert st.osee(cut) == 0.0

    def test_two_equal_terms(self):
        # rho = (11 + xx)/4: superket (|1>|1> + |x>|x>)/sqrt(2) across the cut
        left = np.zeros((1, 4, 2))
        left[0, 0, 0] = left[0, 1, 1] = 1.0
        right = np.zeros((2, 4, 1))
        right[0, 0, 0] = right[1, 1, 0] = 1.0
        st = SuperketMps([left, right])
        assert np.allclose(st.schmidt_spectrum(0), [1 / np.sqrt(2)] * 2)
        assert abs(st.osee(0) - 1.0) < 1e-13

    def test_spectrum_normalized_descending(self, rng):
        st = random_mps(rng, 6, 7)
        s = st.schmidt_spectrum(2)
        assert abs((s ** 2).sum() - 1.0) < 1e-12
        assert np.all(np.diff(s) <= 1e-15)


class TestExpectations:
    def test_empty_string_is_one(self, rng):
        st = random_mps(rng, 4, 3)
        assert st.expect_pauli_string({}) == 1.0

    def test_transverse_on_diagonal_state(self):
        st = SuperketMps.from_local_coeffs(product_state_coeffs([0.4, 0.4, 0.4]))
        assert st.expect_pauli_string({1: 1}) == 0.0

    def test_scale_invariance(self, rng):
        st = random_mps(rng, 5, 4)
        v = st.expect_pauli_string({1: 3, 3: 1})
        st.tensors[2] *= 7.3
        assert abs(st.expect_pauli_string({1: 3, 3: 1}) - v) < 1e-12


class TestRenormalizeIdentity:
    def test_rescales_to_one(self, rng):
        st = random_mps(rng, 4, 3)
        st.tensors[1] *= 2.0
        prev = st.renormalize_identity()
        assert abs(prev - 2.0) < 1e-12
        assert abs(st.identity_coefficient() - 1.0) < 1e-12

    def test_noop_when_already_one(self, rng):
        st = random_mps(rng, 4, 3)
        prev = st.renormalize_identity()
        assert abs(prev - 1.0) < 1e-12

    def test_underflow_guard(self):
        st = SuperketMps.from_local_coeffs([[1, 0, 0, 0]] * 3)
        st.tensors[1] *= 1e-320
        with pytest.raises(StateCollapsedError):
            st.renormalize_identity()


def test_dense_export_refused_for_large_n():
    st = SuperketMps.from_local_coeffs([[1, 0, 0, 0]] * 9)
    with pytest.raises(ValueError):
        st.to_dense_coeffs()
