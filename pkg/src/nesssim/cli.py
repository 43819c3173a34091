"""Command-line driver: run / resume / observe / oracle / compare / sweep.

Exit codes: 0 success (run converged), 2 configuration or usage error,
3 t_max reached without convergence, 4 numerical failure (state collapse).
"""

import argparse
import concurrent.futures
import json
import sys
from pathlib import Path

import numpy as np

from . import checkpoint as ckpt
from . import observables as obs
from . import oracle as orc
from . import tebd
from .config import (ConfigError, config_from_text, energy_bond_endpoints,
                     load_config, make_bath_spec, make_model_spec)
from .mps import (StateCollapsedError, SuperketMps, interpolating_potentials,
                  product_state_coeffs)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NOT_CONVERGED = 3
EXIT_NUMERICAL = 4


def _build_problem(cfg):
    model = make_model_spec(cfg)
    bath = make_bath_spec(cfg)
    gens = tebd.assemble_local_liouvilleans(model, bath)
    plan = tebd.build_trotter_plan(gens, cfg["evolve.tau"],
                                   order=cfg["evolve.order"])
    probe = obs.TransportProbe(model=model, bond_terms=gens.bond_terms,
                               skip_left=cfg["observe.skip_left"],
                               skip_right=cfg["observe.skip_right"])
    return model, bath, gens, plan, probe


def _initial_state(cfg, bath):
    n = cfg["model.n"]
    if bath.kind == "single_spin":
        mus = interpolating_potentials(n, bath.mu_left, bath.mu_right)
    else:
        mus = np.zeros(n)   # maximally mixed start for thermal driving
    return SuperketMps.from_local_coeffs(product_state_coeffs(mus))


def _conv_spec(cfg):
    return tebd.ConvergenceSpec(
        tol_uniformity=cfg["convergence.tol_uniformity"],
        tol_drift=cfg["convergence.tol_drift"],
        window=cfg["convergence.window"],
        t_max=cfg["evolve.t_max"],
        current_floor=cfg["convergence.current_floor"])


def _bond_policy(cfg):
    return tebd.BondPolicy(
        dmax=cfg["evolve.dmax_init"], cap=cfg["evolve.dmax_cap"],
        increment=cfg["evolve.dmax_increment"],
        growth_threshold=cfg["evolve.growth_threshold"],
        trunc_eps=cfg["evolve.trunc_eps"])


def _out_dir(cfg, cfg_path, override):
    if override:
        path = Path(override)
    elif cfg["output.dir"]:
        path = Path(cfg["output.dir"])
    else:
        stem = Path(cfg_path).stem if cfg_path else "run"
        path = Path("runs") / stem
    path.mkdir(parents=True, exist_ok=True)
    return path


def _write_outputs(out, cfg, model, gens, state, t_final, converged,
                   tag="mpo", diag_rows=None):
    n = model.n
    profile = obs.spin_profile(state)
    current = obs.spin_current_profile(state)
    obs.write_series_csv(out / "profile.csv", profile, ("site", "value"))
    obs.write_series_csv(out / "current.csv", current, ("site", "value"))
    center = (n - 1) // 2
    spectrum = state.schmidt_spectrum(center)
    obs.write_series_csv(out / "schmidt.csv", spectrum, ("index", "mu"))
    osee_center = state.osee(center)

    if model.kind == "xxz":
        report = obs.fit_transport_coefficient(
            profile, current, cfg["observe.skip_left"], cfg["observe.skip_right"])
    else:
        eprofile = obs.energy_density_profile(state, gens.bond_terms)
        ecurrent = obs.energy_current_profile(state, model.hx)
        obs.write_series_csv(out / "energy_profile.csv", eprofile, ("bond", "value"))
        obs.write_series_csv(out / "energy_current.csv", ecurrent,
                             ("site", "value"), start_index=2)
        report = _energy_report(cfg, eprofile, ecurrent)
    summary = {
        "tag": tag,
        "n": int(n),
        "model": model.kind,
        "bath": cfg["bath.kind"],
        "j_mean": report.j_mean,
        "drop": report.drop,
        "gradient": report.gradient,
        "kappa": report.kappa,
        "ballistic": report.ballistic,
        "osee_center": float(osee_center),
        "converged": bool(converged),
        "t_final": float(t_final),
        "D_final": int(state.max_bond),
        "config": cfg.flat(),
    }
    obs.write_summary_json(out / "summary.json", summary)
    return summary


def _energy_report(cfg, eprofile, ecurrent):
    lo, hi = energy_bond_endpoints(cfg)
    n = cfg["model.n"]
    drop = eprofile[hi] - eprofile[lo]
    gradient = drop / (hi - lo + 1)
    inner = obs.retained_interior(ecurrent, cfg["observe.skip_left"],
                                  cfg["observe.skip_right"])
    j_mean = float(np.mean(inner))
    ballistic = bool(abs(gradient) <= 1e-3 * abs(j_mean))
    return obs.TransportReport(
        profile=eprofile, currents=ecurrent, j_mean=j_mean, drop=float(drop),
        gradient=float(gradient),
        kappa=None if ballistic else float(-j_mean / gradient),
        ballistic=ballistic,
        skip_left=cfg["observe.skip_left"], skip_right=cfg["observe.skip_right"])


def _evolve(cfg, cfg_path, out_override, state=None, t0=0.0, quiet=False,
            log_mode="w"):
    model, bath, gens, plan, probe = _build_problem(cfg)
    if state is None:
        state = _initial_state(cfg, bath)
    out = _out_dir(cfg, cfg_path, out_override)
    digest = cfg.digest()
    log_path = out / "diagnostics.csv"
    log = open(log_path, log_mode)
    if log_mode == "w":
        log.write(tebd.RunDiagnostics.csv_header() + "\n")

    def row_sink(row):
        log.write(tebd.RunDiagnostics.csv_line(row) + "\n")
        log.flush()
        if not quiet:
            print(f"  t={row.t:8.2f}  D={row.d_max:3d}  j={row.j_mean:+.6e}  "
                  f"spread={row.j_spread:.3f}  osee={row.osee_center:.4f}",
                  flush=True)

    def checkpoint_sink(st, t):
        ckpt.save_checkpoint(out / f"checkpoint_t{t:010.2f}.ness", st, t, digest)

    try:
        state, diag, converged = tebd.evolve_to_ness(
            state, plan, probe, _conv_spec(cfg), _bond_policy(cfg), t0=t0,
            parallel=cfg["evolve.parallel_bonds"], row_sink=row_sink,
            checkpoint_sink=checkpoint_sink,
            checkpoint_every=cfg["output.checkpoint_every"])
    finally:
        log.close()
    t_final = diag.rows[-1].t if diag.rows else t0
    ckpt.save_checkpoint(out / "final.ness", state, t_final, digest)
    summary = _write_outputs(out, cfg, model, gens, state, t_final, converged)
    if not quiet:
        print(json.dumps({k: summary[k] for k in
                          ("n", "j_mean", "kappa", "ballistic", "converged",
                           "t_final", "D_final")}))
    return EXIT_OK if converged else EXIT_NOT_CONVERGED


def cmd_run(args):
    cfg = load_config(args.config)
    return _evolve(cfg, args.config, args.out, quiet=args.quiet)


def cmd_resume(args):
    state, t0, digest = ckpt.load_checkpoint(args.checkpoint)
    cfg = load_config(args.config)
    if digest != cfg.digest() and not args.force:
        print("resume refused: checkpoint model/bath digest does not match "
              "the configuration (use --force to override)", file=sys.stderr)
        return EXIT_CONFIG
    return _evolve(cfg, args.config, args.out, state=state, t0=t0,
                   quiet=args.quiet, log_mode="a")


def cmd_observe(args):
    state, t0, digest = ckpt.load_checkpoint(args.checkpoint)
    out = Path(args.out or Path(args.checkpoint).parent)
    out.mkdir(parents=True, exist_ok=True)
    if args.config:
        cfg = load_config(args.config)
        if digest != cfg.digest() and not args.force:
            print("observe refused: digest mismatch (use --force)", file=sys.stderr)
            return EXIT_CONFIG
        model, bath, gens, _, _ = _build_problem(cfg)
        _write_outputs(out, cfg, model, gens, state, t0, converged=True,
                       tag="observe")
    else:
        profile = obs.spin_profile(state)
        current = obs.spin_current_profile(state)
        obs.write_series_csv(out / "profile.csv", profile, ("site", "value"))
        obs.write_series_csv(out / "current.csv", current, ("site", "value"))
        center = (state.n - 1) // 2
        obs.write_series_csv(out / "schmidt.csv", state.schmidt_spectrum(center),
                             ("index", "mu"))
    print(f"observables written to {out}")
    return EXIT_OK


def cmd_oracle(args):
    cfg = load_config(args.config)
    n = cfg["model.n"]
    if n > orc.MAX_ORACLE_SITES:
        print(f"oracle refused: n={n} > {orc.MAX_ORACLE_SITES}", file=sys.stderr)
        return EXIT_CONFIG
    model = make_model_spec(cfg)
    bath = make_bath_spec(cfg)
    gens = tebd.assemble_local_liouvilleans(model, bath)
    out = _out_dir(cfg, args.config, args.out)
    liou = orc.dense_liouvillean(model, bath)
    coeffs = orc.ness_nullspace(liou)
    profile = orc.spin_profile_from_coeffs(coeffs, n)
    current = orc.spin_current_from_coeffs(coeffs, n)
    obs.write_series_csv(out / "profile.csv", profile, ("site", "value"))
    obs.write_series_csv(out / "current.csv", current, ("site", "value"))
    if model.kind == "xxz":
        report = obs.fit_transport_coefficient(
            profile, current, cfg["observe.skip_left"], cfg["observe.skip_right"])
        j_mean, kappa, ballistic = report.j_mean, report.kappa, report.ballistic
        drop, gradient = report.drop, report.gradient
    else:
        eprofile = orc.energy_profile_from_coeffs(coeffs, gens.bond_terms, n)
        ecurrent = orc.energy_current_from_coeffs(coeffs, n, model.hx)
        obs.write_series_csv(out / "energy_profile.csv", eprofile, ("bond", "value"))
        report = _energy_report(cfg, eprofile, ecurrent)
        j_mean, kappa, ballistic = report.j_mean, report.kappa, report.ballistic
        drop, gradient = report.drop, report.gradient
    summary = {"tag": "oracle", "n": n, "model": model.kind,
               "bath": cfg["bath.kind"], "j_mean": j_mean, "drop": drop,
               "gradient": gradient, "kappa": kappa, "ballistic": ballistic,
               "converged": True, "t_final": None, "D_final": None,
               "config": cfg.flat()}
    obs.write_summary_json(out / "summary.json", summary)
    print(json.dumps({k: summary[k] for k in ("n", "j_mean", "kappa", "tag")}))
    return EXIT_OK


def cmd_compare(args):
    cfg = load_config(args.config)
    n = cfg["model.n"]
    if n > 5:
        print(f"compare requires n <= 5, got {n}", file=sys.stderr)
        return EXIT_CONFIG
    model, bath, gens, plan, probe = _build_problem(cfg)
    t_target = cfg["evolve.t_max"] if cfg["evolve.t_max"] > 0 else 20.0 * n
    state = _initial_state(cfg, bath)
    nsteps = int(round(t_target / plan.tau))
    dmax = cfg["evolve.dmax_cap"]
    for k in range(nsteps):
        tebd.step(state, plan, dmax, cfg["evolve.trunc_eps"], step_index=k)
    liou = orc.dense_liouvillean(model, bath)
    if bath.kind == "single_spin":
        mus = interpolating_potentials(n, bath.mu_left, bath.mu_right)
    else:
        mus = np.zeros(n)
    c0 = orc.product_state_coeffs_dense(product_state_coeffs(mus))
    ct = orc.time_integrate(liou, c0, nsteps * plan.tau)
    devs = {
        "spin_profile": float(np.abs(obs.spin_profile(state)
                                     - orc.spin_profile_from_coeffs(ct, n)).max()),
        "spin_current": float(np.abs(obs.spin_current_profile(state)
                                     - orc.spin_current_from_coeffs(ct, n)).max()),
    }
    if model.kind == "tilted_ising":
        devs["energy_profile"] = float(np.abs(
            obs.energy_density_profile(state, gens.bond_terms)
            - orc.energy_profile_from_coeffs(ct, gens.bond_terms, n)).max())
    print(json.dumps({"t": nsteps * plan.tau, "max_abs_deviation": devs}))
    return EXIT_OK


def _sweep_member(payload):
    text, n, out_dir = payload
    try:
        cfg = config_from_text(text + f"\nmodel.n = {n}\n", source=f"sweep[n={n}]")
        code = _evolve(cfg, None, out_dir, quiet=True)
        with open(Path(out_dir) / "summary.json") as fh:
            summary = json.load(fh)
        summary["exit"] = code
        return n, summary
    except Exception as exc:   # keep the sweep going on member failure
        return n, {"error": f"{type(exc).__name__}: {exc}", "exit": EXIT_NUMERICAL}


def cmd_sweep(args):
    sizes = [int(s) for s in args.sizes.split(",")]
    if sizes != sorted(sizes):
        print("--sizes must be ascending", file=sys.stderr)
        return EXIT_CONFIG
    with open(args.config) as fh:
        base_text = fh.read()
    # strip any fixed n so the per-member override is the only one
    base_text = "\n".join(ln for ln in base_text.splitlines()
                          if not ln.split("#")[0].strip().startswith("model.n"))
    out_root = Path(args.out or Path("runs") / (Path(args.config).stem + "_sweep"))
    out_root.mkdir(parents=True, exist_ok=True)
    payloads = [(base_text, n, str(out_root / f"n{n:03d}")) for n in sizes]
    results = {}
    if args.jobs > 1:
        with concurrent.futures.ProcessPoolExecutor(max_workers=args.jobs) as ex:
            for n, summary in ex.map(_sweep_member, payloads):
                results[n] = summary
    else:
        for payload in payloads:
            n, summary = _sweep_member(payload)
            results[n] = summary
            print(f"n={n}: {summary.get('error') or 'done'}", flush=True)
    with open(out_root / "aggregate.csv", "w") as fh:
        fh.write("n,j_mean,drop,kappa,converged\n")
        for n in sizes:
            s = results[n]
            if "error" in s:
                fh.write(f"{n},,,,error\n")
            else:
                kappa = "" if s["kappa"] is None else repr(s["kappa"])
                fh.write(f"{n},{s['j_mean']!r},{s['drop']!r},{kappa},"
                         f"{s['converged']}\n")
    print(f"sweep aggregate written to {out_root / 'aggregate.csv'}")
    return EXIT_OK


def main(argv=None):
    parser = argparse.ArgumentParser(
        prog="nesssim",
        description="Boundary-driven Lindblad steady states of spin-1/2 "
                    "chains with a matrix-product superket ansatz")
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, fn, **kwargs):
        p = sub.add_parser(name, **kwargs)
        p.set_defaults(fn=fn)
        p.add_argument("--out", default=None, help="output directory")
        return p

    p = add("run", cmd_run, help="evolve a configuration to its steady state")
    p.add_argument("config")
    p.add_argument("--quiet", action="store_true")

    p = add("resume", cmd_resume, help="continue evolution from a checkpoint")
    p.add_argument("checkpoint")
    p.add_argument("config")
    p.add_argument("--force", action="store_true",
                   help="ignore model/bath digest mismatch")
    p.add_argument("--quiet", action="store_true")

    p = add("observe", cmd_observe, help="recompute observables of a checkpoint")
    p.add_argument("checkpoint")
    p.add_argument("--config", default=None)
    p.add_argument("--force", action="store_true")

    p = add("oracle", cmd_oracle, help="dense steady state (n <= 6)")
    p.add_argument("config")

    p = add("compare", cmd_compare,
            help="max observable deviation, MPO vs dense integration (n <= 5)")
    p.add_argument("config")

    p = add("sweep", cmd_sweep, help="run a configuration across chain sizes")
    p.add_argument("config")
    p.add_argument("--sizes", required=True, help="ascending list, e.g. 16,24,32")
    p.add_argument("--jobs", type=int, default=1)

    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except StateCollapsedError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
