import numpy as np
import pytest
from conftest import random_mps

from nesssim import checkpoint as C
from nesssim.mps import SuperketMps, product_state_coeffs
from nesssim.observables import spin_profile


class TestRoundTrip:
    def test_state_and_metadata_survive(self, rng, tmp_path):
        st = random_mps(rng, 6, 5)
        digest = C.parameter_digest("model.kind = xxz\nmodel.n = 6")
        ref = spin_profile(st)
        path = tmp_path / "state.ness"
        C.save_checkpoint(path, st, t=12.5, digest=digest)
        loaded, t, dg = C.load_checkpoint(path)
        assert t == 12.5 and dg == digest
        assert loaded.n == 6
        assert np.abs(spin_profile(loaded) - ref).max() < 1e-11
        assert loaded.center == 0

    def test_exact_tensor_round_trip(self, tmp_path):
        st = SuperketMps.from_local_coeffs(product_state_coeffs([0.3, -0.2, 0.1]))
        st.canonicalize(0)
        tensors = [t.copy() for t in st.tensors]
        path = tmp_path / "p.ness"
        C.save_checkpoint(path, st, t=0.0)
        loaded, _, _ = C.load_checkpoint(path)
        for a, b in zip(tensors, loaded.tensors):
            assert np.array_equal(a, b)
        for a, b in zip(st.lambdas, loaded.lambdas):
            assert np.array_equal(a, b)

    def test_lambdas_fresh_after_save(self, rng, tmp_path):
        st = random_mps(rng, 5, 6)
        path = tmp_path / "s.ness"
        C.save_checkpoint(path, st, t=1.0)
        loaded, _, _ = C.load_checkpoint(path)
        for lam in loaded.lambdas:
            assert abs((lam ** 2).sum() - 1.0) < 1e-12

    def test_header_layout_stable(self, tmp_path):
        st = SuperketMps.from_local_coeffs([[1, 0, 0, 0]] * 2)
        path = tmp_path / "h.ness"
        C.save_checkpoint(path, st, t=3.0)
        raw = path.read_bytes()
        assert raw[:8] == b"NESSKET1"
        import struct
        version, n, norm = struct.unpack_from("<III", raw, 8)
        assert (version, n, norm) == (1, 2, 1)
        (t,) = struct.unpack_from("<d", raw, 20)
        assert t == 3.0


class TestValidation:
    def test_rejects_bad_magic(self, tmp_path):
        path = tmp_path / "bad.ness"
        path.write_bytes(b"NOTAKET1" + b"\x00" * 64)
        with pytest.raises(C.CheckpointError):
            C.load_checkpoint(path)

    def test_rejects_truncated_file(self, rng, tmp_path):
        st = random_mps(rng, 4, 3)
        path = tmp_path / "t.ness"
        C.save_checkpoint(path, st, t=0.0)
        path.write_bytes(path.read_bytes() + b"\x00" * 8)
        with pytest.raises(C.CheckpointError):
            C.load_checkpoint(path)

    def test_rejects_bad_digest_length(self, rng, tmp_path):
        st = random_mps(rng, 3, 2)
        with pytest.raises(ValueError):
            C.save_checkpoint(tmp_path / "d.ness", st, t=0.0, digest=b"short")
