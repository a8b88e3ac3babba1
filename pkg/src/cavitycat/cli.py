"""Command-line front end.

Exit codes: 0 success, 2 configuration error, 3 numerical guard, 4 acceptance failure.
"""
from __future__ import annotations

import argparse
import json
import math
import sys
from pathlib import Path

import numpy as np

from . import acceptance, decoherence, homodyne, jc, phase_space
from .errors import ConfigError, ConstraintError, NumericalGuardError
from .io import (
    ScenarioConfig,
    dumps,
    parse_complex,
    parse_grid,
    parse_pi_list,
    parse_pi_multiple,
    read_state_file,
    state_document,
    write_text,
)

EXIT_CONFIG = 2
EXIT_NUMERICAL = 3
EXIT_ACCEPT = 4


def _emit(text: str, out) -> None:
    if out:
        write_text(out, text)
    else:
        sys.stdout.write(text)


def _scenario(args) -> ScenarioConfig:
    if getattr(args, "config", None):
        cfg = ScenarioConfig.load(args.config)
    else:
        if args.alpha is None or args.gts is None:
            raise ConfigError("give --alpha and --gts, or --config")
        cfg = ScenarioConfig(alpha=parse_complex(args.alpha), gts=parse_pi_list(args.gts))
    if args.nmax is not None:
        cfg.n_max_override = args.nmax
    return cfg


def _metadata(cfg: ScenarioConfig, n_max: int, joint: float, probs=None) -> dict:
    meta = {
        "alpha_re": cfg.alpha.real,
        "alpha_im": cfg.alpha.imag,
        "gts_pi": [g / math.pi for g in cfg.gts],
        "joint_prob": joint,
        "n_max": n_max,
    }
    if probs is not None:
        meta["conditional_probs"] = probs
    return meta


def _prepare_state(cfg: ScenarioConfig):
    state = jc.coherent_state(cfg.alpha, cfg.n_max_override)
    probs = []
    for gt in cfg.gts:
        state, p = jc.project_atom(state, jc.AtomPassage(gt))
        probs.append(p)
    return state, float(np.prod(probs)), probs


def _load_input(args):
    """State and scenario from ``--state`` or from inline parameters."""
    if getattr(args, "state", None):
        state, meta = read_state_file(args.state)
        if "alpha_re" in meta:
            cfg = ScenarioConfig(
                alpha=complex(meta["alpha_re"], meta.get("alpha_im", 0.0)),
                gts=[g * math.pi for g in meta.get("gts_pi", [])],
            )
        else:
            cfg = None
        return state, cfg
    cfg = _scenario(args)
    state, _, _ = _prepare_state(cfg)
    return state, cfg


def cmd_prepare(args) -> int:
    cfg = _scenario(args)
    state, joint, probs = _prepare_state(cfg)
    doc = state_document(state, _metadata(cfg, state.n_max, joint, probs))
    _emit(dumps(doc), args.out)
    return 0


def _grid_from(args, default_half: float):
    if args.grid:
        return parse_grid(args.grid)
    return phase_space.GridSpec.square(default_half, args.step)


def _render(args, kind: str) -> int:
    state, cfg = _load_input(args)
    obj = state
    if args.approx:
        if cfg is None or not cfg.gts:
            raise ConfigError("--approx needs alpha and gts (state metadata or inline)")
        obj = jc.approximate_superposition(cfg.alpha, cfg.gts)
    half = math.ceil(math.sqrt(state.mean_photon()) + 2)
    spec = _grid_from(args, half)
    kappa_t = getattr(args, "kappa_t", None)
    if kappa_t is not None:
        if cfg is None:
            raise ConfigError("--kappa-t needs alpha and gts")
        alpha_prime = abs(cfg.alpha)
        etas = [jc.ApproxParams.from_gt(g, alpha_prime**2).eta for g in cfg.gts]
        if len(etas) != 2:
            raise ConfigError("--kappa-t applies to two-atom preparations")
        rho = decoherence.analytic_decohered_state(alpha_prime, etas[0], etas[1], kappa_t)
        values = np.vstack([rho.wigner(row) for row in spec.points()])
        grid = phase_space.PhaseSpaceGrid(spec, values)
    else:
        grid = phase_space.evaluate_grid(kind, obj, spec, args.threads)
    _emit(grid.to_csv(), args.out)
    if args.json:
        write_text(args.json, dumps(grid.to_json()))
    return 0


def cmd_wigner(args) -> int:
    return _render(args, "wigner")


def cmd_qfunc(args) -> int:
    return _render(args, "q")


def cmd_scan(args) -> int:
    state, cfg = _load_input(args)
    beta_mag = args.beta_mag
    if beta_mag is None:
        if cfg is None:
            raise ConfigError("--beta-mag is required when the state carries no alpha")
        beta_mag = abs(cfg.alpha)
    gt_p = parse_pi_multiple(args.gtp)
    scan = homodyne.phase_scan(state, beta_mag, gt_p, args.nphi, threads=args.threads)
    peaks = homodyne.find_peaks(scan, args.prominence)
    _emit(scan.to_csv(), args.out)
    lines = [f"peaks (prominence >= {args.prominence:g} of range): {len(peaks)}", "phi,pg"]
    lines += [f"{p:.6f},{v:.6f}" for p, v in peaks]
    if cfg is not None and cfg.gts:
        lines.append("branch_signs,centroid_angle,expected_peak,nearest_peak,difference")
        angles = jc.branch_centroid_angles(cfg.alpha, cfg.gts, state.n_max)
        for signs, ang in zip(jc.sign_vectors(len(cfg.gts)), angles):
            exp_peak = (ang + math.pi) % (2 * math.pi)
            if peaks:
                near = min((p for p, _ in peaks), key=lambda p: homodyne.angular_distance(p, exp_peak))
                diff = homodyne.angular_distance(near, exp_peak)
                lines.append(f"{''.join('+' if s > 0 else '-' for s in signs)},{ang:.6f},{exp_peak:.6f},{near:.6f},{diff:.6f}")
    report = "\n".join(lines) + "\n"
    if args.report:
        write_text(args.report, report)
    (sys.stderr if not args.out else sys.stdout).write(report)
    return 0


def cmd_qzeros(args) -> int:
    qz = phase_space.q_zero_closed_form(args.n1, args.n2)
    s = jc.compass_state(qz.alpha_prime)
    ray = args.ray * math.pi if args.ray is not None else qz.ray_angle
    r_max = args.r_max if args.r_max is not None else 2 * qz.gamma_mag + 4
    roots = phase_space.q_zero_scan(s, ray, r_max)
    lines = [
        f"n1={qz.n1} n2={qz.n2} alpha'={qz.alpha_prime:.12g} ray={ray:.12g}",
        f"closed_form |gamma| = {qz.gamma_mag:.12g}",
        "root,difference_from_closed_form",
    ]
    lines += [f"{r:.12g},{r - qz.gamma_mag:.3e}" for r in roots]
    _emit("\n".join(lines) + "\n", args.out)
    return 0


def cmd_decohere(args) -> int:
    alpha_prime = args.alpha_prime
    eta1 = math.pi * alpha_prime**2 / 2 if args.eta1 is None else args.eta1
    eta2 = math.pi * alpha_prime**2 / 4 if args.eta2 is None else args.eta2
    nbar = alpha_prime**2
    if args.kappa_t:
        times = [float(t) for t in args.kappa_t.split(",")]
    else:
        times = [0.0, 1 / (2 * nbar), 1 / nbar, 2 / nbar]
    spec = _grid_from(args, math.ceil(alpha_prime + 2))
    out_dir = Path(args.out or ".")
    summary = []
    for i, kt in enumerate(times):
        rho = decoherence.analytic_decohered_state(alpha_prime, eta1, eta2, kt)
        values = np.vstack([rho.wigner(row) for row in spec.points()])
        grid = phase_space.PhaseSpaceGrid(spec, values)
        write_text(out_dir / f"wigner_kt{i}.csv", grid.to_csv())
        summary.append(decoherence.snapshot_summary(alpha_prime, eta1, eta2, kt))
    write_text(out_dir / "decoherence_summary.json", dumps(summary))
    return 0


def cmd_accept(args) -> int:
    results = acceptance.run_all(args.out, threads=args.threads)
    ok = all(r.passed for r in results)
    print(json.dumps({"passed": ok, "failed": [r.number for r in results if not r.passed]}))
    return 0 if ok else EXIT_ACCEPT


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--nmax", type=int, default=None, help="Fock cutoff override")
    common.add_argument("--out", default=None, help="output file (directory for decohere/accept)")
    common.add_argument("--threads", type=int, default=1)
    common.add_argument("--seed", type=int, default=None, help="reserved; all paths are deterministic")

    scenario = argparse.ArgumentParser(add_help=False)
    scenario.add_argument("--alpha", default=None, help="coherent amplitude, e.g. 4 or 2+1j")
    scenario.add_argument("--gts", default=None, help="interaction times in units of pi, e.g. 3.7pi,1.9pi")
    scenario.add_argument("--config", default=None, help="JSON scenario file")

    source = argparse.ArgumentParser(add_help=False, parents=[scenario])
    source.add_argument("--state", default=None, help="state file written by 'prepare'")

    grid = argparse.ArgumentParser(add_help=False)
    grid.add_argument("--grid", default=None, help="'xmin,xmax,ymin,ymax,step' or 'half_width,step'")
    grid.add_argument("--step", type=float, default=0.05)
    grid.add_argument("--json", default=None, help="also write the grid JSON document here")

    parser = argparse.ArgumentParser(prog="cavitycat", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("prepare", parents=[common, scenario], help="prepare the cavity field")
    p.set_defaults(func=cmd_prepare)

    for name, func, text in (("wigner", cmd_wigner, "Wigner grid"), ("qfunc", cmd_qfunc, "Husimi Q grid")):
        p = sub.add_parser(name, parents=[common, source, grid], help=text)
        p.add_argument("--approx", action="store_true", help="use the linearized coherent superposition")
        if name == "wigner":
            p.add_argument("--kappa-t", type=float, default=None, help="damped four-lobe state at this kappa*t")
        p.set_defaults(func=func)

    p = sub.add_parser("scan", parents=[common, source], help="homodyne probe-atom phase scan")
    p.add_argument("--beta-mag", type=float, default=None, help="reference amplitude (default |alpha|)")
    p.add_argument("--gtp", default="1.5pi", help="probe interaction time in units of pi")
    p.add_argument("--nphi", type=int, default=720)
    p.add_argument("--prominence", type=float, default=0.25)
    p.add_argument("--report", default=None, help="write the peak report here")
    p.set_defaults(func=cmd_scan)

    p = sub.add_parser("qzeros", parents=[common], help="Q-function zeros on a ray")
    p.add_argument("n1", type=int)
    p.add_argument("n2", type=int)
    p.add_argument("--ray", type=float, default=None, help="ray angle in units of pi (default 1/4)")
    p.add_argument("--r-max", type=float, default=None)
    p.set_defaults(func=cmd_qzeros)

    p = sub.add_parser("decohere", parents=[common, grid], help="damped four-lobe Wigner snapshots")
    p.add_argument("--alpha-prime", type=float, default=4.0)
    p.add_argument("--eta1", type=float, default=None)
    p.add_argument("--eta2", type=float, default=None)
    p.add_argument("--kappa-t", default=None, help="comma-separated kappa*t values")
    p.set_defaults(func=cmd_decohere)

    p = sub.add_parser("accept", parents=[common], help="run the acceptance checks")
    p.set_defaults(func=cmd_accept)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, ConstraintError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except NumericalGuardError as exc:
        print(f"numerical guard: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
