"""Transport observables of a superket state.

Profiles and currents are plain Pauli-string expectation values; the
conductivity fit uses the boundary-skip conventions of the reference
experiments: with a profile P of length m (1-based indexing) and skip counts
(kl, kr),

    drop     = P[m - kr] - P[kl + 1]
    gradient = drop / (m - kl - kr)
    kappa    = -<j> / gradient,

where <j> averages the current over the retained interior.  The same formula
serves site-indexed (spin) and bond-indexed (energy) profiles: pass the bond
profile and its own length plays the role of m.
"""

import csv
import json
from dataclasses import dataclass

import numpy as np

from .pauli import hermitian_coeffs


class _Envs:
    """Left/right identity-selector partial products of an MPS contraction."""

    def __init__(self, state):
        ts = state.tensors
        n = len(ts)
        left = [np.ones(1)]
        for t in ts:
            left.append(left[-1] @ t[:, 0, :])
        right = [np.ones(1)] * (n + 1)
        for i in range(n - 1, -1, -1):
            right[i] = ts[i][:, 0, :] @ right[i + 1]
        self.tensors = ts
        self.left = left          # left[i]: sites < i contracted
        self.right = right        # right[i]: sites >= i contracted
        self.total = float(left[n][0])

    def one_site(self, l, a):
        t = self.tensors[l]
        return float(self.left[l] @ t[:, a, :] @ self.right[l + 1]) / self.total

    def two_site(self, l, a, b):
        tl, tr = self.tensors[l], self.tensors[l + 1]
        v = self.left[l] @ tl[:, a, :]
        return float(v @ tr[:, b, :] @ self.right[l + 2]) / self.total


def spin_profile(state):
    """S_l = <sigma^z_l> for every site."""
    env = _Envs(state)
    return np.array([env.one_site(l, 3) for l in range(state.n)])


def spin_current_profile(state):
    """j_l = <sx_l sy_{l+1} - sy_l sx_{l+1}> for every bond."""
    env = _Envs(state)
    return np.array([env.two_site(l, 1, 2) - env.two_site(l, 2, 1)
                     for l in range(state.n - 1)])


def energy_density_profile(state, bond_terms):
    """eps_l = <h_{l,l+1}> for every bond, via the Pauli expansion of the term."""
    if len(bond_terms) != state.n - 1:
        raise ValueError("bond terms do not match the chain length")
    env = _Envs(state)
    out = np.empty(state.n - 1)
    for l, term in enumerate(bond_terms):
        hc = hermitian_coeffs(term)
        val = hc[0]
        for a in np.nonzero(np.abs(hc[1:]) > 0)[0] + 1:
            val += hc[a] * env.two_site(l, a % 4, a // 4)
        out[l] = val
    return out


def energy_current_profile(state, hx):
    """j_l = 2 hx <sz_{l-1} sy_l - sy_l sz_{l+1}> for interior sites
    (entry i corresponds to site i+1, 0-based)."""
    env = _Envs(state)
    out = np.empty(state.n - 2)
    for l in range(1, state.n - 1):
        out[l - 1] = 2.0 * hx * (env.two_site(l - 1, 3, 2)
                                 - env.two_site(l, 2, 3))
    return out


@dataclass
class TransportReport:
    profile: np.ndarray
    currents: np.ndarray
    j_mean: float
    drop: float
    gradient: float
    kappa: float | None
    ballistic: bool
    skip_left: int
    skip_right: int


def retained_interior(values, skip_left, skip_right):
    """Slice of a per-site/per-bond array with the boundary skips removed."""
    hi = len(values) - skip_right
    if skip_left >= hi:
        raise ValueError("skips remove the whole array")
    return values[skip_left:hi]


def fit_transport_coefficient(profile, currents, skip_left, skip_right,
                              ballistic_ratio=1e-3):
    """Conductivity fit with the endpoint conventions described above.

    When the driving gradient is below ``ballistic_ratio`` times the mean
    current the fit is suppressed (kappa None, ballistic flag set) instead of
    reporting a divergent value.
    """
    profile = np.asarray(profile, dtype=np.float64)
    currents = np.asarray(currents, dtype=np.float64)
    m = len(profile)
    if skip_left < 0 or skip_right < 0 or skip_left + skip_right >= m - 1:
        raise ValueError(f"skip counts ({skip_left}, {skip_right}) too large for m={m}")
    drop = float(profile[m - skip_right - 1] - profile[skip_left])
    gradient = drop / (m - skip_left - skip_right)
    j_mean = float(np.mean(retained_interior(currents, skip_left, skip_right)))
    ballistic = bool(abs(gradient) <= ballistic_ratio * abs(j_mean))
    kappa = None if ballistic else -j_mean / gradient
    return TransportReport(profile=profile, currents=currents, j_mean=j_mean,
                           drop=float(drop), gradient=float(gradient),
                           kappa=kappa, ballistic=ballistic,
                           skip_left=skip_left, skip_right=skip_right)


@dataclass
class TransportProbe:
    """Bundle of the profile/current used for convergence monitoring and the
    final report: spin quantities for the XXZ chain, energy quantities for
    the tilted Ising chain."""
    model: object
    bond_terms: list
    skip_left: int
    skip_right: int

    def density_profile(self, state):
        if self.model.kind == "xxz":
            return spin_profile(state)
        return energy_density_profile(state, self.bond_terms)

    def current_profile(self, state):
        if self.model.kind == "xxz":
            return spin_current_profile(state)
        return energy_current_profile(state, self.model.hx)

    def fit(self, state):
        return fit_transport_coefficient(self.density_profile(state),
                                         self.current_profile(state),
                                         self.skip_left, self.skip_right)


def write_series_csv(path, values, columns, start_index=1):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(columns)
        for i, v in enumerate(values):
            w.writerow([i + start_index, repr(float(v))])


def write_summary_json(path, payload):
    with open(path, "w") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")
