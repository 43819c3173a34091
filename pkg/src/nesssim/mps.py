"""Matrix-product superket representation of a density operator.

The density matrix of an n-site spin-1/2 chain is stored through its Pauli
expansion coefficients, factorized as an open-boundary matrix product: one
rank-3 tensor per site with legs ``(left bond, pauli s, right bond)``, real
float64 throughout (Hermiticity of rho is equivalent to real coefficients).

Scale convention: the coefficient of the all-identity string is held at 1, so
``tr rho = 2^n`` and every expectation value is a plain ratio of string
coefficients.  This avoids the 2^-n underflow of trace-one normalization.

Canonical form: tensors left of ``center`` are left-orthogonal, tensors right
of it right-orthogonal.  Center moves use thin SVDs, so the Schmidt vector of
every crossed bond is refreshed on the way; ``lambdas[b]`` always holds the
values from the most recent factorization at bond ``b`` (descending,
normalized to sum of squares one).
"""

import numpy as np
from scipy.linalg import svd as _svd


class StateCollapsedError(RuntimeError):
    """The identity-string coefficient underflowed; the run cannot continue."""


def _thin_svd(mat):
    try:
        return _svd(mat, full_matrices=False, lapack_driver="gesdd",
                    check_finite=False)
    except np.linalg.LinAlgError:
        # gesdd occasionally fails to converge; gesvd is slower but robust
        return _svd(mat, full_matrices=False, lapack_driver="gesvd",
                    check_finite=False)


class SuperketMps:

    def __init__(self, tensors, center=None):
        self.tensors = list(tensors)
        n = len(self.tensors)
        if n == 0:
            raise ValueError("need at least one site")
        for i, t in enumerate(self.tensors):
            if t.ndim != 3 or t.shape[1] != 4:
                raise ValueError(f"site {i}: tensor must be (Dl, 4, Dr), got {t.shape}")
        if self.tensors[0].shape[0] != 1 or self.tensors[-1].shape[2] != 1:
            raise ValueError("boundary bonds must have dimension 1")
        for i in range(n - 1):
            if self.tensors[i].shape[2] != self.tensors[i + 1].shape[0]:
                raise ValueError(f"bond {i}: dimension mismatch")
        self.lambdas = [np.ones(1) for _ in range(n - 1)]
        self.center = center
        self.discarded_total = 0.0

    # ------------------------------------------------------------------
    # construction / bookkeeping

    @classmethod
    def from_local_coeffs(cls, vectors):
        """Product state from per-site Pauli 4-vectors.

        Each vector must have a nonzero identity component c0; sites are
        rescaled so the global identity-string coefficient is exactly 1.
        """
        tensors = []
        for i, v in enumerate(vectors):
            v = np.asarray(v, dtype=np.float64)
            if v.shape != (4,):
                raise ValueError(f"site {i}: need a Pauli 4-vector, got {v.shape}")
            if v[0] == 0.0:
                raise ValueError(f"site {i}: zero identity component (trace-zero factor)")
            tensors.append((v / v[0]).reshape(1, 4, 1))
        # local vectors are not unit-norm, so no canonical center is asserted
        return cls(tensors, center=None)

    @property
    def n(self):
        return len(self.tensors)

    @property
    def bond_dims(self):
        return [t.shape[2] for t in self.tensors[:-1]]

    @property
    def max_bond(self):
        return max(self.bond_dims) if self.n > 1 else 1

    def copy(self):
        dup = SuperketMps([t.copy() for t in self.tensors], center=self.center)
        dup.lambdas = [lam.copy() for lam in self.lambdas]
        dup.discarded_total = self.discarded_total
        return dup

    # ------------------------------------------------------------------
    # canonical form

    def _shift_right(self):
        c = self.center
        t = self.tensors[c]
        dl, _, dr = t.shape
        u, s, vt = _thin_svd(t.reshape(dl * 4, dr))
        nrm = np.linalg.norm(s)
        if nrm == 0.0:
            raise StateCollapsedError("state norm vanished during center shift")
        k = s.shape[0]
        self.tensors[c] = u.reshape(dl, 4, k)
        self.lambdas[c] = s / nrm
        carry = s[:, None] * vt
        nxt = self.tensors[c + 1]
        self.tensors[c + 1] = (carry @ nxt.reshape(dr, -1)).reshape(k, 4, nxt.shape[2])
        self.center = c + 1

    def _shift_left(self):
        c = self.center
        t = self.tensors[c]
        dl, _, dr = t.shape
        u, s, vt = _thin_svd(t.reshape(dl, 4 * dr))
        nrm = np.linalg.norm(s)
        if nrm == 0.0:
            raise StateCollapsedError("state norm vanished during center shift")
        k = s.shape[0]
        self.tensors[c] = vt.reshape(k, 4, dr)
        self.lambdas[c - 1] = s / nrm
        carry = u * s
        prv = self.tensors[c - 1]
        self.tensors[c - 1] = (prv.reshape(-1, dl) @ carry).reshape(
            prv.shape[0], 4, k)
        self.center = c - 1

    def move_center(self, site):
        if not 0 <= site < self.n:
            raise IndexError(f"site {site} out of range for n={self.n}")
        if self.center is None:
            self.canonicalize(site)
            return
        while self.center < site:
            self._shift_right()
        while self.center > site:
            self._shift_left()

    def canonicalize(self, center=0):
        """Restore canonical form about ``center`` (QR from the left, then
        SVD shifts from the right, refreshing the crossed Schmidt vectors).
        The represented state is unchanged up to floating-point gauge."""
        if not 0 <= center < self.n:
            raise IndexError(f"center {center} out of range")
        for i in range(self.n - 1):
            t = self.tensors[i]
            dl, _, dr = t.shape
            q, r = np.linalg.qr(t.reshape(dl * 4, dr))
            k = q.shape[1]
            self.tensors[i] = q.reshape(dl, 4, k)
            nxt = self.tensors[i + 1]
            self.tensors[i + 1] = (r @ nxt.reshape(dr, -1)).reshape(k, 4, nxt.shape[2])
        self.center = self.n - 1
        self.move_center(center)
        return self

    # ------------------------------------------------------------------
    # gates

    def apply_one_site_gate(self, site, gate):
        """Contract a 4x4 propagator with the Pauli leg at ``site``."""
        if not 0 <= site < self.n:
            raise IndexError(f"site {site} out of range")
        gate = np.asarray(gate)
        if gate.shape != (4, 4):
            raise ValueError(f"one-site gate must be 4x4, got {gate.shape}")
        self.move_center(site)
        t = self.tensors[site]
        self.tensors[site] = np.ascontiguousarray(
            np.tensordot(gate, t, axes=(1, 1)).transpose(1, 0, 2))

    def apply_two_site_gate(self, bond, gate, dmax, trunc_eps, move="right"):
        """Contract a 16x16 propagator with the site pair at ``bond``.

        The gate index convention is a = s_left + 4*s_right.  The two-site
        block is re-split by SVD keeping the smallest rank whose relative
        discarded weight is <= trunc_eps, capped at dmax; the discarded
        weight sum_cut mu^2 / sum_all mu^2 is returned and accumulated.
        ``move`` picks which side keeps the canonical center afterwards.
        """
        if not 0 <= bond < self.n - 1:
            raise IndexError(f"bond {bond} out of range")
        gate = np.asarray(gate)
        if gate.shape != (16, 16):
            raise ValueError(f"two-site gate must be 16x16, got {gate.shape}")
        if self.center is None or not bond <= self.center <= bond + 1:
            self.move_center(bond if move == "right" else bond + 1)
        tl, tr = self.tensors[bond], self.tensors[bond + 1]
        dl, dm, dr = tl.shape[0], tl.shape[2], tr.shape[2]
        theta = tl.reshape(dl * 4, dm) @ tr.reshape(dm, 4 * dr)
        # merge pauli legs with the left site least significant: (s2,s1)
        theta = theta.reshape(dl, 4, 4, dr).transpose(0, 2, 1, 3).reshape(dl, 16, dr)
        theta = np.tensordot(gate, theta, axes=(1, 1))  # (a', dl, dr)
        theta = theta.transpose(1, 0, 2).reshape(dl, 4, 4, dr).transpose(0, 2, 1, 3)
        u, s, vt = _thin_svd(theta.reshape(dl * 4, 4 * dr))

        ssq = s * s
        total = ssq.sum()
        if total == 0.0:
            raise StateCollapsedError("state norm vanished under a gate")
        tail = np.empty(s.shape[0] + 1)
        tail[-1] = 0.0
        tail[:-1] = np.cumsum(ssq[::-1])[::-1]
        keep = int(np.argmax(tail <= trunc_eps * total))
        keep = max(1, min(keep, int(dmax), s.shape[0]))
        discarded = tail[keep] / total

        u, s, vt = u[:, :keep], s[:keep], vt[:keep]
        self.lambdas[bond] = s / np.linalg.norm(s)
        if move == "right":
            self.tensors[bond] = u.reshape(dl, 4, keep)
            self.tensors[bond + 1] = (s[:, None] * vt).reshape(keep, 4, dr)
            self.center = bond + 1
        else:
            self.tensors[bond] = (u * s).reshape(dl, 4, keep)
            self.tensors[bond + 1] = vt.reshape(keep, 4, dr)
            self.center = bond
        self.discarded_total += discarded
        return discarded

    # ------------------------------------------------------------------
    # observables

    def expect_pauli_string(self, string):
        """<sigma^string> = c_string / c_identity for a sparse site->pauli map.

        Evaluated by contracting the chain with per-site selector vectors;
        invariant under global rescaling and gauge changes.
        """
        for site, s in string.items():
            if not 0 <= site < self.n:
                raise IndexError(f"site {site} out of range")
            if not 0 <= s <= 3:
                raise ValueError(f"invalid Pauli index {s}")
        num = np.ones(1)
        den = np.ones(1)
        for i, t in enumerate(self.tensors):
            den = den @ t[:, 0, :]
            num = num @ t[:, string.get(i, 0), :]
        return float(num[0] / den[0])

    def identity_coefficient(self):
        v = np.ones(1)
        for t in self.tensors:
            v = v @ t[:, 0, :]
        return float(v[0])

    def renormalize_identity(self):
        """Rescale so the identity-string coefficient is exactly 1.

        Returns the previous coefficient (the applied factor is its inverse).
        """
        c = self.identity_coefficient()
        if abs(c) < 1e-300:
            raise StateCollapsedError(
                f"identity coefficient underflow ({c!r}); state collapsed")
        at = self.center if self.center is not None else 0
        self.tensors[at] = self.tensors[at] / c
        return c

    def schmidt_spectrum(self, cut):
        """Schmidt coefficients across bond ``cut`` (descending, sum mu^2 = 1).

        Bond ``cut`` separates sites 0..cut from cut+1..n-1.
        """
        if not 0 <= cut < self.n - 1:
            raise IndexError(f"cut {cut} out of range")
        self.move_center(cut)
        t = self.tensors[cut]
        s = _thin_svd(t.reshape(t.shape[0] * 4, t.shape[2]))[1]
        nrm = np.linalg.norm(s)
        if nrm == 0.0:
            raise StateCollapsedError("state norm vanished")
        s = s / nrm
        self.lambdas[cut] = s
        return s.copy()

    def osee(self, cut):
        """Operator-space entanglement entropy -sum mu^2 log2 mu^2 at ``cut``."""
        p = self.schmidt_spectrum(cut) ** 2
        p = p[p > 0.0]
        return float(-(p * np.log2(p)).sum())

    def norm_squared(self):
        """<rho|rho> in the Pauli-string inner product (coefficient 2-norm^2)."""
        env = np.ones((1, 1))
        for t in self.tensors:
            env = np.einsum("ab,apc,bpd->cd", env, t, t, optimize=True)
        return float(env[0, 0])

    def to_dense_coeffs(self, limit=8):
        """Full coefficient vector, index s = sum_i s_i 4^i (site 0 least
        significant).  Only for small chains (n <= limit)."""
        if self.n > limit:
            raise ValueError(f"dense export refused for n={self.n} > {limit}")
        arr = self.tensors[0][0]  # (4, D)
        for t in self.tensors[1:]:
            arr = np.tensordot(arr, t, axes=(-1, 0))
        arr = arr[..., 0]  # axes (s_0, ..., s_{n-1})
        return np.ascontiguousarray(np.transpose(arr).reshape(-1))


def interpolating_potentials(n, mu_left, mu_right):
    """Linear ramp of local potentials between the two bath values."""
    if n == 1:
        return np.array([0.5 * (mu_left + mu_right)])
    return mu_left + (mu_right - mu_left) * np.arange(n) / (n - 1)


def product_state_coeffs(potentials):
    """Per-site 4-vectors of rho ~ exp(-sum_l mu_l sigma^z_l)."""
    return [np.array([1.0, 0.0, 0.0, -np.tanh(m)]) for m in potentials]
