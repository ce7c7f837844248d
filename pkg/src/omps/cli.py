"""Command-line front end.

Subcommands: run, sweep, oracle-check, stability, convergence, serve.
Report paths drop delimited output and rendered figures side by side in
the --out directory.  OMPS_THREADS bounds sweep worker processes.
"""

from __future__ import annotations

import argparse
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import replace
from pathlib import Path

import numpy as np

from . import analysis, figures
from .config import (
    ConfigError,
    PRESETS,
    RunConfig,
    apply_overrides,
    load_config,
    preset,
)
from .continuum import (
    ContinuumParams,
    ContinuumSim,
    lattice_continuum_distance,
    reference_points,
)
from .field import Simulation, initial_state, simulate
from .model import hss_field, hss_intensities, max_growth_rate
from .oracle import meanfield_residual, residual_slope
from .snapshots import export_csv


def _load(args) -> RunConfig:
    if args.config and args.preset:
        raise ConfigError("give --config or --preset, not both")
    if args.config:
        cfg = load_config(args.config)
    elif args.preset:
        cfg = preset(args.preset)
    else:
        raise ConfigError("one of --config or --preset is required")
    return apply_overrides(cfg, seed=args.seed, dtau=args.dt,
                           tau_end=args.tau_end)


def _outdir(args) -> Path:
    out = Path(args.out or "out")
    out.mkdir(parents=True, exist_ok=True)
    return out


def build_sim(cfg: RunConfig):
    """Instantiate the solver a config describes."""
    if cfg.mode == "continuum":
        cp = ContinuumParams.from_lattice(cfg.params, cfg.continuum_points)
        sim = ContinuumSim(cp, cfg.schedule)
        if cfg.noise_amp > 0.0:
            rng = np.random.default_rng(cfg.seed)
            n = sim.grid.n
            sim.field = sim.field + cfg.noise_amp * (
                rng.standard_normal(n) + 1j * rng.standard_normal(n))
        return sim
    sim = Simulation(cfg.params, cfg.schedule,
                     field0=initial_state(cfg.params, cfg.schedule,
                                          seed=cfg.seed,
                                          noise_amp=cfg.noise_amp))
    return sim


def run_config(cfg: RunConfig):
    """Run a config to completion and classify the outcome."""
    sim = build_sim(cfg)
    result = simulate(sim, tau_end=cfg.tau_end, dtau=cfg.dtau,
                      snap_interval=cfg.snap_interval,
                      tol_steady=cfg.tol_steady)
    report = analysis.classify(result.final, sigma_x=cfg.schedule.sigma_x,
                               steady=result.flags.steady)
    return result, report


def cmd_run(args) -> int:
    cfg = _load(args)
    out = _outdir(args)
    result, report = run_config(cfg)
    snap = result.final
    snap.write(out / "final.snap")
    export_csv(snap, out / "final.csv")
    figures.render_state(snap, out / "final.png", schedule=cfg.schedule,
                         title=f"{cfg.label}  tau={snap.tau:.0f}  {report.label}")
    print(f"tau={snap.tau:g} steady={result.flags.steady} class={report.label}"
          + (f" kstar={report.kstar:.3f}" if report.kstar else "")
          + (f" contrast={report.contrast:.2f}" if report.contrast else ""))
    if cfg.schedule.beams:
        per = analysis.soliton_persistence(result.snapshots, cfg.schedule)
        line = f"written={per.written} survived={per.survived_tau:g}"
        if per.disturbance_pct is not None:
            line += f" disturbance={per.disturbance_pct:.2f}%"
        if per.erased is not None:
            line += f" erased={per.erased}"
        print(line)
    print(f"wrote {out / 'final.snap'}, {out / 'final.csv'}, {out / 'final.png'}")
    return 0


_AXES = ("N", "E0sq", "Delta", "rho")


def _parse_axis(spec: str):
    if "=" not in spec:
        raise ConfigError(f"axis must look like name=v1,v2,... got {spec!r}")
    name, _, rest = spec.partition("=")
    name = name.strip()
    if name not in _AXES:
        raise ConfigError(f"unknown sweep axis {name!r}; use one of {_AXES}")
    vals = []
    for tok in rest.split(","):
        tok = tok.strip()
        if ":" in tok:
            lo, hi, num = tok.split(":")
            vals.extend(np.linspace(float(lo), float(hi), int(num)).tolist())
        elif tok:
            vals.append(float(tok))
    if not vals:
        raise ConfigError("axis spec has no values")
    return name, vals


def _apply_axis(cfg: RunConfig, name: str, value: float) -> RunConfig:
    if name == "N":
        return replace(cfg, params=replace(cfg.params, n_mirrors=int(value)))
    if name == "E0sq":
        return replace(cfg, schedule=replace(cfg.schedule, e0=float(np.sqrt(value))))
    if name == "Delta":
        return replace(cfg, params=replace(cfg.params, Delta=value))
    return replace(cfg, params=replace(cfg.params, rho=value))


def _sweep_point(payload):
    name, value, cfg = payload
    try:
        result, report = run_config(cfg)
        return {
            "axis": name, "value": value, "steady": result.flags.steady,
            "label": report.label,
            "kstar": "" if report.kstar is None else f"{report.kstar:.6g}",
            "n_peaks": len(report.peaks),
            "contrast": f"{report.contrast:.6g}",
            "max_intensity": f"{np.max(result.final.intensity):.6g}",
            "error": "",
        }
    except Exception as exc:  # a diverged point must not sink the sweep
        return {"axis": name, "value": value, "steady": False, "label": "",
                "kstar": "", "n_peaks": 0, "contrast": "",
                "max_intensity": "", "error": str(exc)}


_SWEEP_COLS = ("axis", "value", "steady", "label", "kstar", "n_peaks",
               "contrast", "max_intensity", "error")


def cmd_sweep(args) -> int:
    cfg = _load(args)
    out = _outdir(args)
    name, values = _parse_axis(args.axis)
    manifest = out / "sweep_manifest.txt"
    results = out / "sweep.csv"

    done = set()
    if manifest.exists():
        for line in manifest.read_text().splitlines():
            if line.endswith(" DONE"):
                done.add(line[:-5])
    todo = [(name, v, _apply_axis(cfg, name, v)) for v in values
            if f"{name}={v:.10g}" not in done]
    if not results.exists():
        results.write_text(",".join(_SWEEP_COLS) + "\n")

    workers = max(1, int(os.environ.get("OMPS_THREADS", "1")))
    def record(row):
        with open(results, "a") as fh:
            fh.write(",".join(str(row[c]) for c in _SWEEP_COLS) + "\n")
        with open(manifest, "a") as fh:
            fh.write(f"{name}={row['value']:.10g} DONE\n")
        tag = row["label"] or row["error"]
        print(f"{name}={row['value']:g}: {tag}")

    if workers > 1 and len(todo) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            for row in pool.map(_sweep_point, todo):
                record(row)
    else:
        for payload in todo:
            record(_sweep_point(payload))
    print(f"wrote {results} ({len(values) - len(todo)} skipped as done)")
    return 0


def cmd_oracle_check(args) -> int:
    out = _outdir(args)
    transmissions = [float(t) for t in args.transmissions.split(",")]
    rows = meanfield_residual(transmissions, delta=args.delta, e0=args.e0,
                              gamma=args.gamma, Omega=args.Omega)
    path = out / "oracle.csv"
    with open(path, "w") as fh:
        fh.write("transmission,intensity_map,intensity_meanfield,residual,trips,converged\n")
        for r in rows:
            fh.write(f"{r.transmission:.10g},{r.intensity_map:.10g},"
                     f"{r.intensity_meanfield:.10g},{r.residual:.10g},"
                     f"{r.trips},{r.converged}\n")
    slope = residual_slope(rows)
    figures.render_convergence([(r.transmission, max(r.residual, 1e-300))
                                for r in rows], out / "oracle.png",
                               xlabel="T", ylabel="relative residual",
                               title=f"mean-field residual, slope {slope:.2f}")
    for r in rows:
        print(f"T={r.transmission:g}: residual={r.residual:.3e} "
              f"trips={r.trips} converged={r.converged}")
    print(f"slope={slope:.3f}; wrote {path}")
    return 0


def cmd_stability(args) -> int:
    cfg = _load(args)
    out = _outdir(args)
    delta = cfg.params.Delta
    e2 = cfg.schedule.e0 ** 2
    lo = args.pump_min if args.pump_min is not None else 0.5 * e2
    hi = args.pump_max if args.pump_max is not None else 1.5 * e2
    points = analysis.bistability_curve(delta, (lo, hi), args.samples,
                                        params=cfg.params)
    path = out / "bistability.csv"
    with open(path, "w") as fh:
        fh.write("pump_sq,intensity,stable\n")
        for p in points:
            fh.write(f"{p.pump_sq:.10g},{p.intensity:.10g},{int(p.stable)}\n")
    figures.render_bistability(points, out / "bistability.png",
                               title=f"Delta={delta:g}")

    kbars = np.linspace(0.0, args.kmax, 241)
    lines = ["pump_sq=" + f"{e2:.6g}"]
    for root in hss_intensities(delta, e2):
        st = hss_field(root, delta, cfg.schedule.e0)
        growth = max_growth_rate(st, kbars, cfg.params)
        figures.render_growth(kbars, growth,
                              out / f"growth_I{root:.3f}.png",
                              title=f"I={root:.3f}, E0^2={e2:g}")
        kc = kbars[int(np.argmax(growth))]
        lines.append(f"I={root:.6g}: max growth {growth.max():+.4f} at k={kc:.3f}")
    report = out / "stability.txt"
    report.write_text("\n".join(lines) + "\n")
    print("\n".join(lines))
    print(f"wrote {path}, {report}")
    return 0


def cmd_convergence(args) -> int:
    cfg = _load(args)
    out = _outdir(args)
    n_list = [int(v) for v in args.mirrors.split(",")]
    npts = reference_points(n_list, minimum=args.reference_points)
    ccfg = replace(cfg, mode="continuum", continuum_points=npts)
    cres, _ = run_config(ccfg)

    rows = []
    for n in n_list:
        lres, rep = run_config(replace(cfg, params=replace(cfg.params,
                                                           n_mirrors=n)))
        d = lattice_continuum_distance(lres.final, cres.final)
        rows.append((n, cfg.params.abar * cfg.params.n_mirrors / n,
                     d["intensity"], d["Z"], d["total"], rep.label))
        print(f"N={n}: dI={d['intensity']:.4e} dZ={d['Z']:.4e} "
              f"total={d['total']:.4e} class={rep.label}")
    path = out / "convergence.csv"
    with open(path, "w") as fh:
        fh.write("N,abar,dist_intensity,dist_Z,dist_total,label\n")
        for r in rows:
            fh.write(f"{r[0]},{r[1]:.10g},{r[2]:.10g},{r[3]:.10g},{r[4]:.10g},{r[5]}\n")
    figures.render_convergence([(r[1], r[4]) for r in rows],
                               out / "convergence.png",
                               xlabel="abar", ylabel="L2 distance",
                               title="lattice vs continuum")
    print(f"wrote {path}")
    return 0


def cmd_serve(args) -> int:
    from .server import serve_forever
    cfg = _load(args) if (args.config or args.preset) else None
    host, _, port = args.bind.rpartition(":")
    if not host or not port.isdigit():
        raise ConfigError(f"--bind must look like HOST:PORT, got {args.bind!r}")
    return serve_forever(cfg, host=host, port=int(port),
                         static_dir=args.static_dir,
                         max_sessions=args.max_sessions)


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="omps",
        description="Optomechanical micromirror-array cavity simulator")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, config=True):
        if config:
            p.add_argument("--config", help="path to a run configuration file")
            p.add_argument("--preset", choices=PRESETS,
                           help="named reference scenario")
        p.add_argument("--seed", type=int, help="override the run seed")
        p.add_argument("--out", help="output directory (default ./out)")
        p.add_argument("--dt", type=float, help="override the time step")
        p.add_argument("--tau-end", type=float, help="override the run length")

    p = sub.add_parser("run", help="run one configuration to tau_end")
    common(p)
    p.set_defaults(fn=cmd_run)

    p = sub.add_parser("sweep", help="run a 1-d parameter sweep")
    common(p)
    p.add_argument("--axis", required=True,
                   help="axis spec, e.g. N=20,40,80 or E0sq=2.0:2.6:7")
    p.set_defaults(fn=cmd_sweep)

    p = sub.add_parser("oracle-check",
                       help="round-trip map versus steady-state cubic")
    common(p, config=False)
    p.add_argument("--transmissions", default="0.1,0.03,0.01")
    p.add_argument("--delta", type=float, default=0.0)
    p.add_argument("--e0", type=float, default=float(np.sqrt(2.0)))
    p.add_argument("--gamma", type=float, default=0.1)
    p.add_argument("--Omega", type=float, default=10.0)
    p.set_defaults(fn=cmd_oracle_check)

    p = sub.add_parser("stability",
                       help="bistability curve and growth-rate scan")
    common(p)
    p.add_argument("--pump-min", type=float)
    p.add_argument("--pump-max", type=float)
    p.add_argument("--samples", type=int, default=200)
    p.add_argument("--kmax", type=float, default=3.0)
    p.set_defaults(fn=cmd_stability)

    p = sub.add_parser("convergence",
                       help="lattice-vs-continuum distance over mirror counts")
    common(p)
    p.add_argument("--mirrors", default="20,40,80")
    p.add_argument("--reference-points", type=int, default=1024)
    p.set_defaults(fn=cmd_convergence)

    p = sub.add_parser("serve", help="websocket steering server")
    common(p)
    p.add_argument("--bind", default="127.0.0.1:8765", metavar="HOST:PORT")
    p.add_argument("--static-dir", help="serve this directory over HTTP")
    p.add_argument("--max-sessions", type=int, default=8)
    p.set_defaults(fn=cmd_serve)

    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
