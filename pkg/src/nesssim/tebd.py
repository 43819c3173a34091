"""Trotterized time evolution of the superket under the full Liouvillean.

The Liouvillean splits into bond generators (unitary part, with any two-spin
bath generators folded into the edge bonds before exponentiation, since bath
and edge Hamiltonian do not commute) plus optional one-site bath generators
at the chain ends (which commute with every bond except the one touching
their site).

A second-order step is the palindromic product

    X(t/2) A(t/2) B(t) A(t/2) X(t/2)

with A/B the even/odd-index bond groups (internally commuting) and X the
one-site baths.  The emitted gate order interleaves the X gates into the
sweeps using exact commutations only, so each step is one left-right-left
pass with locally optimal truncation at every bond; steps without site gates
alternate sweep direction to avoid dead center moves.  Fourth order is the
triple-jump composition of second-order steps (its negative substep is not a
completely positive map, hence order 2 is the default).
"""

from dataclasses import dataclass, field

import numpy as np

from .baths import (single_spin_bath_generator, two_spin_bath_generator,
                    resolve_two_spin_targets)
from .models import build_bond_terms
from .observables import retained_interior
from .pauli import hamiltonian_superop, superop_exponential


@dataclass
class LocalGenerators:
    """Per-bond 16x16 generators plus one-site bath generators by site."""
    n: int
    bond: list
    site: dict
    bond_terms: list


def assemble_local_liouvilleans(model, bath):
    """Split the Liouvillean of (model, bath) into local generators."""
    terms = build_bond_terms(model)
    bond = [hamiltonian_superop(t) for t in terms]
    site = {}
    if bath.kind == "single_spin":
        site[0] = single_spin_bath_generator(bath.mu_left, bath.gamma)
        site[model.n - 1] = single_spin_bath_generator(bath.mu_right, bath.gamma)
    else:
        if model.n < 4:
            raise ValueError("two-spin baths need n >= 4 (edge bonds must not overlap)")
        left, right = resolve_two_spin_targets(bath, terms[0], terms[-1])
        bond[0] = bond[0] + two_spin_bath_generator(left, bath.gamma)
        bond[-1] = bond[-1] + two_spin_bath_generator(right, bath.gamma)
    return LocalGenerators(n=model.n, bond=bond, site=site, bond_terms=terms)


@dataclass
class Gate:
    kind: str      # 'site' | 'bond'
    pos: int       # site index or bond index (0-based)
    coeff: float   # fraction of tau this gate advances
    mat: np.ndarray = field(repr=False, default=None)
    move: str = "right"   # which side keeps the center after a bond gate


class _GateCache:
    """One propagator per (generator, effective time)."""

    def __init__(self):
        self._store = {}

    def get(self, gen, tau_eff):
        key = (gen.tobytes(), float(tau_eff))
        mat = self._store.get(key)
        if mat is None:
            mat = superop_exponential(gen, tau_eff)
            self._store[key] = mat
        return mat

    def __len__(self):
        return len(self._store)


@dataclass
class TrotterPlan:
    n: int
    tau: float
    order: int
    sequences: list          # gate lists cycled over successive steps
    groups: list             # literal (kind, positions, coeff) grouping per tau
    cache_size: int

    def sequence_for(self, step_index):
        return self.sequences[step_index % len(self.sequences)]


def _order2_groups(gens):
    """Literal symmetric splitting: X(1/2) A(1/2) B(1) A(1/2) X(1/2)."""
    a_bonds = list(range(0, gens.n - 1, 2))
    b_bonds = list(range(1, gens.n - 1, 2))
    sites = sorted(gens.site)
    groups = []
    if sites:
        groups.append(("site", sites, 0.5))
    groups.append(("bond", a_bonds, 0.5))
    if b_bonds:
        groups.append(("bond", b_bonds, 1.0))
    groups.append(("bond", a_bonds, 0.5))
    if sites:
        groups.append(("site", sites, 0.5))
    return groups


def _order2_sequence(gens, tau, cache, reverse=False, coeff_scale=1.0):
    """Sweep-ordered gate list equal (as an operator product) to the literal
    order-2 splitting; site gates are slotted next to the only bond gate they
    do not commute with."""
    n = gens.n
    a_bonds = list(range(0, n - 1, 2))
    b_bonds = list(range(1, n - 1, 2))

    def bond_gate(b, c, move):
        return Gate("bond", b, c * coeff_scale,
                    cache.get(gens.bond[b], c * tau), move)

    def site_gate(s, c):
        return Gate("site", s, c * coeff_scale,
                    cache.get(gens.site[s], c * tau))

    if not gens.site:
        head = [bond_gate(b, 0.5, "right") for b in a_bonds]
        mid = [bond_gate(b, 1.0, "left") for b in reversed(b_bonds)]
        tail = [bond_gate(b, 0.5, "right") for b in a_bonds]
        seq = head + mid + tail
        if reverse:
            flip = {"right": "left", "left": "right"}
            seq = [Gate(g.kind, g.pos, g.coeff, g.mat, flip[g.move])
                   for g in reversed(seq)]
        return seq

    # single-site baths at both ends; only the forward ordering is used
    last_in_a = (n - 2) in a_bonds
    head = [site_gate(0, 0.5)]
    head += [bond_gate(b, 0.5, "right") for b in a_bonds if b != n - 2]
    head.append(site_gate(n - 1, 0.5))
    if last_in_a:
        head.append(bond_gate(n - 2, 0.5, "left"))
    mid = [bond_gate(b, 1.0, "left") for b in reversed(b_bonds)]
    tail = [bond_gate(b, 0.5, "right") for b in a_bonds]
    tail.append(site_gate(n - 1, 0.5))
    tail.append(site_gate(0, 0.5))
    return head + mid + tail


_W1 = 1.0 / (2.0 - 2.0 ** (1.0 / 3.0))   # triple-jump coefficients
_W0 = 1.0 - 2.0 * _W1


def build_trotter_plan(gens, tau, order=2):
    """Precompute the gate schedule advancing the state by tau per step."""
    if tau <= 0:
        raise ValueError("tau must be positive")
    if order not in (2, 4):
        raise ValueError(f"unsupported Trotter order {order}")
    cache = _GateCache()
    if order == 2:
        if gens.site:
            sequences = [_order2_sequence(gens, tau, cache)]
        else:
            sequences = [_order2_sequence(gens, tau, cache, reverse=False),
                         _order2_sequence(gens, tau, cache, reverse=True)]
        groups = _order2_groups(gens)
    else:
        def sub(w, rev):
            return _order2_sequence(gens, w * tau, cache, reverse=rev,
                                    coeff_scale=w)
        if gens.site:
            sequences = [sub(_W1, False) + sub(_W0, False) + sub(_W1, False)]
        else:
            sequences = [sub(_W1, False) + sub(_W0, True) + sub(_W1, False),
                         sub(_W1, True) + sub(_W0, False) + sub(_W1, True)]
        groups = [(kind, pos, w * c)
                  for w in (_W1, _W0, _W1)
                  for kind, pos, c in _order2_groups(gens)]
    return TrotterPlan(n=gens.n, tau=tau, order=order, sequences=sequences,
                       groups=groups, cache_size=len(cache))


@dataclass
class StepInfo:
    discarded: float
    renorm: float
    max_bond: int


def step(state, plan, dmax, trunc_eps, step_index=0, parallel=False):
    """Advance the state by one Trotter step; renormalizes the identity
    coefficient and reports the accumulated relative discarded weight."""
    if state.n != plan.n:
        raise ValueError("plan and state chain lengths differ")
    if parallel:
        discarded = _parallel_step(state, plan, dmax, trunc_eps)
    else:
        discarded = 0.0
        for g in plan.sequence_for(step_index):
            if g.kind == "site":
                state.apply_one_site_gate(g.pos, g.mat)
            else:
                discarded += state.apply_two_site_gate(
                    g.pos, g.mat, dmax, trunc_eps, move=g.move)
    renorm = state.renormalize_identity()
    return StepInfo(discarded=discarded, renorm=renorm, max_bond=state.max_bond)


def _parallel_step(state, plan, dmax, trunc_eps):
    """Disjoint-bond mode: each group is applied against the frozen pre-group
    gauge (bond lambdas supply the left weights, Hastings-style update avoids
    lambda inverses), with one re-canonicalization per step.  Gates within a
    group are order-independent, so they may run concurrently."""
    state.canonicalize(0)
    discarded = 0.0
    gate_of = {}
    for g in plan.sequence_for(0):
        gate_of[(g.kind, g.pos, round(g.coeff, 12))] = g.mat
    for kind, positions, coeff in plan.groups:
        if kind == "site":
            for s in positions:
                mat = gate_of[("site", s, round(coeff, 12))]
                t = state.tensors[s]
                state.tensors[s] = np.ascontiguousarray(
                    np.tensordot(mat, t, axes=(1, 1)).transpose(1, 0, 2))
            continue
        for b in positions:
            mat = gate_of[("bond", b, round(coeff, 12))]
            discarded += _hastings_update(state, b, mat, dmax, trunc_eps)
    state.center = None
    state.canonicalize(0)
    return discarded


def _hastings_update(state, b, gate, dmax, trunc_eps):
    from .mps import StateCollapsedError, _thin_svd

    tl, tr = state.tensors[b], state.tensors[b + 1]
    dl, dm, dr = tl.shape[0], tl.shape[2], tr.shape[2]
    c = tl.reshape(dl * 4, dm) @ tr.reshape(dm, 4 * dr)
    c = c.reshape(dl, 4, 4, dr).transpose(0, 2, 1, 3).reshape(dl, 16, dr)
    c = np.tensordot(gate, c, axes=(1, 1)).transpose(1, 0, 2)
    c = c.reshape(dl, 4, 4, dr).transpose(0, 2, 1, 3).reshape(dl * 4, 4 * dr)
    lam = state.lambdas[b - 1] if b > 0 else np.ones(1)
    theta = (c.reshape(dl, -1) * lam[:, None]).reshape(dl * 4, 4 * dr)
    u, s, vt = _thin_svd(theta)
    ssq = s * s
    total = ssq.sum()
    if total == 0.0:
        raise StateCollapsedError("state norm vanished under a gate")
    tail = np.empty(s.shape[0] + 1)
    tail[-1] = 0.0
    tail[:-1] = np.cumsum(ssq[::-1])[::-1]
    keep = int(np.argmax(tail <= trunc_eps * total))
    keep = max(1, min(keep, int(dmax), s.shape[0]))
    state.lambdas[b] = s[:keep] / np.linalg.norm(s[:keep])
    state.tensors[b + 1] = vt[:keep].reshape(keep, 4, dr)
    state.tensors[b] = (c @ vt[:keep].T).reshape(dl, 4, keep)
    return tail[keep] / total


@dataclass
class ConvergenceSpec:
    tol_uniformity: float = 0.02
    tol_drift: float = 0.005
    window: float = 10.0
    t_max: float = 0.0            # 0 -> 20 * n
    current_floor: float = 1e-9

    def resolved_t_max(self, n):
        return self.t_max if self.t_max > 0 else 20.0 * n


@dataclass
class BondPolicy:
    dmax: int = 20
    cap: int = 80
    increment: int = 20
    growth_threshold: float = 3e-7   # per-step discarded weight triggering growth
    trunc_eps: float = 1e-10


@dataclass
class DiagRow:
    t: float
    d_max: int
    discarded: float
    j_mean: float
    j_spread: float
    osee_center: float


@dataclass
class RunDiagnostics:
    rows: list = field(default_factory=list)

    def append(self, row):
        if self.rows and row.t <= self.rows[-1].t:
            raise ValueError("diagnostics time series must be increasing")
        self.rows.append(row)

    @staticmethod
    def csv_header():
        return "t,D_max,discarded_weight,j_mean,j_spread,osee_center"

    @staticmethod
    def csv_line(row):
        return (f"{row.t:.6f},{row.d_max},{row.discarded:.6e},"
                f"{row.j_mean!r},{row.j_spread:.6e},{row.osee_center:.8f}")


def evolve_to_ness(state, plan, probe, conv, policy, t0=0.0, parallel=False,
                   row_sink=None, checkpoint_sink=None, checkpoint_every=0.0,
                   start_index=0):
    """Iterate Trotter steps until the current profile is uniform and
    drift-free, growing the bond cap when per-step truncation exceeds the
    growth threshold.

    Convergence requires, over one window: relative spread of the retained
    current below tol_uniformity and relative drift of both the mean current
    and the profile endpoints below tol_drift.  Returns (state, diagnostics,
    converged); hitting t_max is reported, not raised.
    """
    diag = RunDiagnostics()
    t = t0
    t_max = conv.resolved_t_max(state.n)
    steps_per_window = max(1, int(round(conv.window / plan.tau)))
    dmax = policy.dmax
    prev = None
    converged = False
    center_cut = (state.n - 1) // 2
    next_checkpoint = t + checkpoint_every
    done = 0
    while t < t_max - 1e-9:
        window_disc = 0.0
        for _ in range(steps_per_window):
            if t >= t_max - 1e-9:
                break
            info = step(state, plan, dmax, policy.trunc_eps,
                        step_index=start_index + done, parallel=parallel)
            done += 1
            t = t0 + done * plan.tau
            window_disc += info.discarded
            if info.discarded > policy.growth_threshold and dmax < policy.cap:
                dmax = min(dmax + policy.increment, policy.cap)

        currents = probe.current_profile(state)
        inner = retained_interior(currents, probe.skip_left, probe.skip_right)
        j_mean = float(np.mean(inner))
        scale = max(abs(j_mean), conv.current_floor)
        j_spread = float(np.max(np.abs(inner - j_mean))) / scale
        profile = probe.density_profile(state)
        ends = (float(profile[probe.skip_left]),
                float(profile[len(profile) - probe.skip_right - 1]))
        row = DiagRow(t=t, d_max=state.max_bond, discarded=window_disc,
                      j_mean=j_mean, j_spread=j_spread,
                      osee_center=state.osee(center_cut))
        diag.append(row)
        if row_sink is not None:
            row_sink(row)
        if checkpoint_sink is not None and checkpoint_every > 0 and \
                t >= next_checkpoint - 1e-9:
            checkpoint_sink(state, t)
            next_checkpoint += checkpoint_every

        if prev is not None:
            drift = max(
                abs(j_mean - prev[0]) / max(abs(j_mean), conv.current_floor),
                abs(ends[0] - prev[1][0]) / max(abs(ends[0]), conv.current_floor),
                abs(ends[1] - prev[1][1]) / max(abs(ends[1]), conv.current_floor))
            if j_spread < conv.tol_uniformity and drift < conv.tol_drift:
                converged = True
                break
        prev = (j_mean, ends)
    return state, diag, converged
