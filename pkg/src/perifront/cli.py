"""Command-line surface: config parsing, command dispatch, artifact output.

Exit codes: 0 pass, 1 audit/verify fail, 2 config error, 3 numerical error,
4 missing prerequisite.  Every JSON artifact embeds the resolved config; the
timestamp lives in its own field so reruns with identical config and seed
produce byte-identical payloads otherwise.
"""

import argparse
import json
import sys as _sys
import time
from pathlib import Path

import numpy as np

from . import front_solver as fs
from . import spectral
from . import steady_states as ss
from . import subsuper_verifier as sv
from . import wave_speeds as wsp
from .discretization import LineGrid, PeriodicGrid
from .errors import ConfigError, PerifrontError
from .periodic_coeffs import system_from_mapping

try:
    import tomllib as _toml
except ModuleNotFoundError:  # pragma: no cover
    import tomli as _toml

EXIT_PASS = 0
EXIT_FAIL = 1
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3
EXIT_MISSING = 4

_GRID_KEYS = {"n": 256, "n_per_period": 64, "periods": 80, "dt_safety": 0.9}
_EIGEN_KEYS = {"refine": True}
_SPEEDS_KEYS = {"tol": 1e-8, "mu_lo": 1e-4, "refine": True}
_STEADY_KEYS = {"n_seeds": 64, "t_march": 2.0}
_AUDIT_KEYS = {"n_seeds": 64}
_FRONT_KEYS = {"t_estimate": 40.0, "tol": 0.0, "dt_profile": 0.0, "c_min": 1e-3}
_VERIFY_KEYS = {"n_t": 64, "n_x": 256, "t_sandwich": 8.0, "t_stability": 40.0,
                "stability_tol": 1e-3}
_SIMULATE_KEYS = {"t_total": 20.0, "initial": "front", "use_extended": False}

_SECTION_DEFAULTS = {
    "grid": _GRID_KEYS,
    "eigen": _EIGEN_KEYS,
    "speeds": _SPEEDS_KEYS,
    "steady": _STEADY_KEYS,
    "audit": _AUDIT_KEYS,
    "front": _FRONT_KEYS,
    "verify": _VERIFY_KEYS,
    "simulate": _SIMULATE_KEYS,
}


def _resolve_section(config, name):
    block = dict(_SECTION_DEFAULTS[name])
    given = config.get(name, {})
    unknown = set(given) - set(block)
    if unknown:
        raise ConfigError(f"unknown keys {sorted(unknown)} in [{name}]")
    block.update(given)
    return block


def load_config(path):
    try:
        with open(path, "rb") as fh:
            raw = _toml.load(fh)
    except FileNotFoundError as exc:
        raise ConfigError(f"config file not found: {path}") from exc
    except _toml.TOMLDecodeError as exc:
        raise ConfigError(f"config parse error: {exc}") from exc
    unknown = set(raw) - set(_SECTION_DEFAULTS) - {"system"}
    if unknown:
        raise ConfigError(f"unknown top-level sections: {sorted(unknown)}")
    if "system" not in raw:
        raise ConfigError("missing [system] section")
    resolved = {"system": raw["system"]}
    for name in _SECTION_DEFAULTS:
        resolved[name] = _resolve_section(raw, name)
    for key in ("tol", "mu_lo", "dt_safety"):
        for sec in resolved.values():
            if isinstance(sec, dict) and key in sec and isinstance(sec[key], (int, float)):
                if sec[key] < 0:
                    raise ConfigError(f"{key} must be nonnegative")
    system = system_from_mapping(resolved["system"])
    return system, resolved


def _json_default(obj):
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    raise TypeError(f"not JSON serializable: {type(obj)}")


def write_json(path, payload, config, seed):
    body = {
        "config": config,
        "seed": seed,
        "result": payload,
    }
    text = json.dumps(body, indent=2, sort_keys=True, default=_json_default)
    envelope = {"timestamp": time.strftime("%Y-%m-%dT%H:%M:%SZ", time.gmtime())}
    with open(path, "w") as fh:
        fh.write(json.dumps(envelope, sort_keys=True) + "\n")
        fh.write(text + "\n")
    return text


def _grids(system, cfg):
    g = PeriodicGrid(system.L, int(cfg["grid"]["n_per_period"]))
    periods = int(cfg["grid"]["periods"])
    line = LineGrid(period=system.L, n_per_period=g.n, periods=periods,
                    x_min=-0.5 * periods * system.L)
    return g, line


def cmd_audit(system, cfg, args, out):
    g = PeriodicGrid(system.L, int(cfg["grid"]["n_per_period"]))
    report = ss.audit_assumptions(system, g, n_seeds=int(cfg["audit"]["n_seeds"]),
                                  seed=args.seed, workers=args.threads)
    payload = report.to_dict()
    write_json(out / "audit.json", payload, cfg, args.seed)
    print("assumption audit")
    print(f"  lambda0(d_i,a_i,b_i)        : {report.lambda_00[0]:+.6f} {report.lambda_00[1]:+.6f}  (need > 0)")
    h1 = report.h1
    print(f"  (H1) eigenvalues            : {h1['values'][0]:+.6f} {h1['values'][1]:+.6f}  -> {'pass' if h1['passed'] else 'FAIL'}")
    a1 = report.a1
    print(f"  (A1) transformed            : {a1['values'][0]:+.6f} {a1['values'][1]:+.6f}  -> {'pass' if a1['passed'] else 'FAIL'}")
    b1 = report.b1
    print(f"  (B1) gaps                   : {b1['margins'][0]:+.6f} {b1['margins'][1]:+.6f}  -> {'pass' if b1['passed'] else 'FAIL'}")
    b2 = report.b2
    print(f"  (B2) c1- + c2+              : {b2['c1_minus']:+.6f} + {b2['c2_plus']:+.6f} = {b2['sum']:+.6f}  -> {'pass' if b2['passed'] else 'FAIL'}")
    a2 = report.a2_heuristic
    print(f"  (A2) coexistence states     : {len(a2['states'])} found, {a2['violations']} stable  ({a2['caveat']})")
    print(f"  verdict                     : {'PASS' if report.verdict else 'FAIL'}")
    return EXIT_PASS if report.verdict else EXIT_FAIL


def _front_artifacts(system, cfg, args, out):
    g, line = _grids(system, cfg)
    coop = ss.cooperative_from_competition(system, g)
    fcfg = cfg["front"]
    est = fs.estimate_speed(coop, None, float(fcfg["t_estimate"]), line)
    if abs(est.c) < float(fcfg["c_min"]):
        profile = fs.extract_stationary_profile(coop, line)
    else:
        dtp = float(fcfg["dt_profile"]) or None
        profile = fs.extract_profile(coop, est.c, line, tol=(float(fcfg["tol"]) or None),
                                     initial=est.final_state, dt_target=dtp)
    return coop, est, profile, line


def cmd_front(system, cfg, args, out):
    if not args.force:
        g = PeriodicGrid(system.L, int(cfg["grid"]["n_per_period"]))
        report = ss.audit_assumptions(system, g, n_seeds=int(cfg["audit"]["n_seeds"]),
                                      seed=args.seed, workers=args.threads)
        if not report.verdict:
            print("assumption audit failed; rerun with --force to proceed anyway", file=_sys.stderr)
            return EXIT_MISSING
    coop, est, profile, line = _front_artifacts(system, cfg, args, out)
    profile.export_csv(out / "front_profile.csv")
    meta = profile.metadata()
    meta.pop("history", None)
    payload = {"speed_estimate": est.to_dict(), "profile": meta}
    write_json(out / "front.json", payload, cfg, args.seed)
    print(f"wave speed c = {profile.c:.8g}")
    print(f"profile residual = {profile.residual:.3e}")
    print(f"x-periodicity defect = {profile.periodicity_defect:.3e}")
    print(f"far-field defects = {profile.limits}")
    return EXIT_PASS


def cmd_verify(system, cfg, args, out):
    front_json = out / "front.json"
    if not front_json.exists() and not args.force:
        print("front artifacts missing; run `front` first (or --force to recompute)",
              file=_sys.stderr)
        return EXIT_MISSING
    coop, est, profile, line = _front_artifacts(system, cfg, args, out)
    if profile.c == 0.0:
        print("stationary front: envelope verification needs c != 0", file=_sys.stderr)
        return EXIT_NUMERICAL
    g = PeriodicGrid(system.L, int(cfg["grid"]["n_per_period"]))
    pair0 = spectral.triangular_pair(coop, "around_0", g)
    pair1 = spectral.triangular_pair(coop, "around_1", g)
    pack = sv.build_pack(profile, coop, pair0, pair1)
    vcfg = cfg["verify"]
    ineq = sv.verify_inequalities(pack, coop, n_t=int(vcfg["n_t"]), n_x=int(vcfg["n_x"]))
    pack_s = sv.build_pack(profile, coop, pair0, pair1, z_plus=1.0, z_minus=-1.0)
    sandwich = sv.sandwich_experiment(pack_s, coop, line, float(vcfg["t_sandwich"]))
    data = [profile.state_at(line, t=0.0, shift=0.3),
            fs.front_like_initial(line, width=0.8 * line.period)]
    stability = sv.global_stability_experiment(
        coop, profile, data, float(vcfg["t_stability"]), line,
        tol=float(vcfg["stability_tol"]))
    payload = {
        "constants": pack.constants(),
        "inequalities": ineq.to_dict(),
        "sandwich": sandwich.to_dict(),
        "stability": stability.to_dict(),
    }
    write_json(out / "verify.json", payload, cfg, args.seed)
    ok = ineq.passed and sandwich.passed and stability.passed
    print(f"differential inequalities: {'pass' if ineq.passed else 'FAIL'} (eps_num {ineq.eps_num:.2e})")
    print(f"sandwich: {'pass' if sandwich.passed else 'FAIL'} "
          f"(worst {max(sandwich.worst_low, sandwich.worst_high):.2e})")
    print(f"stability/uniqueness: {'pass' if stability.passed else 'FAIL'} "
          f"(final e {max(r['final_e'] for r in stability.runs):.2e})")
    return EXIT_PASS if ok else EXIT_FAIL


def cmd_eigen(system, cfg, args, out):
    n = int(cfg["grid"].get("n", cfg["grid"]["n_per_period"]))
    g = PeriodicGrid(system.L, max(n, 16))
    rows = []
    for label, (d, a, b) in {
        "species1": (system.d1, system.a1, system.b1),
        "species2": (system.d2, system.a2, system.b2),
    }.items():
        if cfg["eigen"]["refine"]:
            pair = spectral.eigen_refined(d, a, b, g)
        else:
            pair = spectral.principal_eigen(d, a, b, g)
        rows.append((label, pair))
        np.savetxt(out / f"eigenfunction_{label}.csv",
                   np.column_stack([g.nodes(), pair.eigenfunction]),
                   delimiter=",", header="x,phi", comments="", fmt="%.17g")
    payload = {label: pair.to_dict() for label, pair in rows}
    write_json(out / "eigen.json", payload, cfg, args.seed)
    for label, pair in rows:
        extra = f" extrapolated {pair.extrapolated:.12g}" if pair.extrapolated is not None else ""
        print(f"{label}: lambda0 = {pair.value:.12g} (residual {pair.residual:.2e}){extra}")
    return EXIT_PASS


def cmd_speeds(system, cfg, args, out):
    g = PeriodicGrid(system.L, int(cfg["grid"]["n_per_period"]))
    coop = ss.cooperative_from_competition(system, g)
    fine = ss.cooperative_from_competition(system, g.refined(2)) if cfg["speeds"]["refine"] else None
    res = wsp.check_B2(coop, g, sys_fine=fine, tol=float(cfg["speeds"]["tol"]))
    res.c1_minus.samples_csv(out / "dispersion_c1_minus.csv")
    res.c2_plus.samples_csv(out / "dispersion_c2_plus.csv")
    write_json(out / "speeds.json", res.to_dict(), cfg, args.seed)
    print(f"c1- = {res.c1_minus.c_star:.8g} (mu* {res.c1_minus.mu_star:.4g})")
    print(f"c2+ = {res.c2_plus.c_star:.8g} (mu* {res.c2_plus.mu_star:.4g})")
    print(f"(B2) sum = {res.total:.8g} -> {'pass' if res.passed else 'FAIL'}")
    print(f"mirror sum = {res.mirror_total:.8g} -> {'pass' if res.mirror_passed else 'FAIL'}")
    return EXIT_PASS if res.passed else EXIT_FAIL


def cmd_steady(system, cfg, args, out):
    g = PeriodicGrid(system.L, int(cfg["grid"]["n_per_period"]))
    s1 = ss.semitrivial_state(system.d1, system.a1, system.b1, system.a11, g)
    s2 = ss.semitrivial_state(system.d2, system.a2, system.b2, system.a22, g)
    coop = ss.cooperative_from_competition(system, g)
    states = ss.find_coexistence_states(coop, g, n_seeds=int(cfg["steady"]["n_seeds"]),
                                        seed=args.seed, t_march=float(cfg["steady"]["t_march"]),
                                        workers=args.threads)
    np.savetxt(out / "semitrivial.csv",
               np.column_stack([g.nodes(), s1.samples, s2.samples]),
               delimiter=",", header="x,u1_star,u2_star", comments="", fmt="%.17g")
    payload = {
        "u1_star": {"residual": s1.residual, "stability": s1.stability,
                    "eigenvalue": s1.classifying_eigenvalue},
        "u2_star": {"residual": s2.residual, "stability": s2.stability,
                    "eigenvalue": s2.classifying_eigenvalue},
        "coexistence": [
            {"mean": [float(np.mean(s.samples[0])), float(np.mean(s.samples[1]))],
             "lambda_hat": s.classifying_eigenvalue, "stability": s.stability,
             "residual": s.residual}
            for s in states
        ],
    }
    write_json(out / "steady.json", payload, cfg, args.seed)
    print(f"u1*: residual {s1.residual:.2e}, {s1.stability} ({s1.classifying_eigenvalue:+.6f})")
    print(f"u2*: residual {s2.residual:.2e}, {s2.stability} ({s2.classifying_eigenvalue:+.6f})")
    print(f"coexistence states found: {len(states)}")
    for s in states:
        print(f"  mean ({np.mean(s.samples[0]):.4f}, {np.mean(s.samples[1]):.4f}) "
              f"lambda_hat {s.classifying_eigenvalue:+.6f} -> {s.stability}")
    return EXIT_PASS


def cmd_transform(system, cfg, args, out):
    g = PeriodicGrid(system.L, int(cfg["grid"]["n_per_period"]))
    coop = ss.cooperative_from_competition(system, g)
    coop.dump_csv(out / "cooperative_system.csv")
    payload = {"D1": coop.D1, "D2": coop.D2,
               "a1_star_range": [float(coop.a1_star.min()), float(coop.a1_star.max())],
               "a2_star_range": [float(coop.a2_star.min()), float(coop.a2_star.max())]}
    write_json(out / "transform.json", payload, cfg, args.seed)
    print(f"wrote cooperative coefficients (D1 = {coop.D1:.6g}, D2 = {coop.D2:.6g})")
    return EXIT_PASS


def cmd_simulate(system, cfg, args, out):
    g, line = _grids(system, cfg)
    coop = ss.cooperative_from_competition(system, g)
    scfg = cfg["simulate"]
    if scfg["initial"] == "front":
        state = fs.front_like_initial(line)
    elif scfg["initial"] == "step":
        xs = line.nodes()
        mid = 0.5 * (line.x_min + line.x_max)
        step_arr = (xs > mid).astype(float)
        state = fs.CauchyState(line, step_arr, step_arr.copy(), 0.0)
    else:
        raise ConfigError(f"unknown initial data kind {scfg['initial']!r}")
    dt = float(cfg["grid"]["dt_safety"]) * fs.dt_max(coop, bool(scfg["use_extended"]))
    steps = int(np.ceil(float(scfg["t_total"]) / dt))
    for _ in range(steps):
        state = fs.step(state, coop, dt, use_extended=bool(scfg["use_extended"]))
    np.savetxt(out / "simulate_final.csv",
               np.column_stack([line.nodes(), state.u1, state.u2]),
               delimiter=",", header="x,u1,u2", comments="", fmt="%.17g")
    payload = {"t_final": state.t, "dt": dt, "steps": steps,
               "interface": fs.interface_position(state),
               "box": [float(min(state.u1.min(), state.u2.min())),
                       float(max(state.u1.max(), state.u2.max()))]}
    write_json(out / "simulate.json", payload, cfg, args.seed)
    print(f"evolved to t = {state.t:.6g} in {steps} steps; interface at "
          f"{payload['interface']:.6g}")
    return EXIT_PASS


_COMMANDS = {
    "audit": cmd_audit,
    "front": cmd_front,
    "verify": cmd_verify,
    "eigen": cmd_eigen,
    "speeds": cmd_speeds,
    "steady": cmd_steady,
    "transform": cmd_transform,
    "simulate": cmd_simulate,
}


def main(argv=None):
    parser = argparse.ArgumentParser(
        prog="perifront",
        description="numerical laboratory for bistable competition fronts in a periodic habitat",
    )
    parser.add_argument("command", choices=sorted(_COMMANDS))
    parser.add_argument("--config", required=True, help="TOML config file")
    parser.add_argument("--out", default="out", help="output directory")
    parser.add_argument("--threads", type=int, default=1, help="worker cap for parallel parts")
    parser.add_argument("--seed", type=int, default=0, help="seed for stochastic searches")
    parser.add_argument("--force", action="store_true",
                        help="skip prerequisite checks (audit gate, artifact presence)")
    args = parser.parse_args(argv)

    try:
        system, cfg = load_config(args.config)
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        if not out.is_dir():
            raise ConfigError(f"output path {out} is not a directory")
    except ConfigError as exc:
        print(f"config error: {exc}", file=_sys.stderr)
        return EXIT_CONFIG

    try:
        return _COMMANDS[args.command](system, cfg, args, out)
    except ConfigError as exc:
        print(f"config error: {exc}", file=_sys.stderr)
        return EXIT_CONFIG
    except PerifrontError as exc:
        print(f"numerical error: {exc}", file=_sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    raise SystemExit(main())
