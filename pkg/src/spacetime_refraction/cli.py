"""Command-line interface.

    spacetime-refraction snell --preset fig2
    spacetime-refraction ray --preset fig2 --report
    spacetime-refraction simulate-step --preset fig2 --csv --pgm --report --out-dir out/
    spacetime-refraction simulate-spinor --preset fig4 --pgm --threads 4
    spacetime-refraction render --input out/density.csv --preset fig2 --out-dir out/

Exit codes: 0 success, 2 configuration error, 3 numerical-domain error,
4 I/O error.  Errors are also printed to stderr as a JSON object.
"""
from __future__ import annotations

import argparse
import json
import math
import sys
import warnings
from pathlib import Path


from . import __version__
from .analysis import (
    broadening,
    check_spacetime_snell,
    completion_row,
    fit_worldline,
    spectral_split,
    stable_from,
    width_ratio,
)
from .config import RunConfig, build, resolve
from .dynamics import density_moments, evolve_spinor, evolve_step, regional_norms
from .errors import ConfigError, DomainError, EvanescentRegime, RefractionError
from .model import GaussianSpectrum, StepPotential
from .output import read_csv, render_heatmap, write_csv
from .rays import (
    DispersiveMedium,
    group_velocity,
    predict_worldlines,
    quantum_medium,
    snell_spacetime,
    snell_spatial,
)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_DOMAIN = 3
EXIT_IO = 4

SUBCOMMAND_MODES = {
    "snell": "snell",
    "ray": "ray",
    "simulate-step": "step",
    "simulate-spinor": "spinor",
}


def _deg(rad: float) -> float:
    return math.degrees(rad)


def _fit_record(fit) -> dict:
    return {
        "slope": fit.slope,
        "angle_deg": _deg(fit.angle),
        "intercept": fit.intercept,
        "residual": fit.residual,
        "velocity": fit.velocity,
        "window": list(fit.window),
        "n_rows": fit.n_rows,
    }


def _ray_record(fan) -> dict:
    return {
        "arrival_time": fan.arrival_time,
        "total_reflection": fan.total_reflection,
        "worldlines": [
            {
                "label": w.label,
                "weight": w.weight,
                "segments": [
                    {
                        "label": s.label,
                        "start": list(s.start),
                        "end": None if s.end is None else list(s.end),
                        "slope": s.slope,
                        "angle_deg": _deg(math.atan(s.slope)),
                    }
                    for s in w.segments
                ],
            }
            for w in fan
        ],
    }


def _media(packet: GaussianSpectrum, step: StepPotential):
    # energy measured from the region-1 potential, so n1 = 1 and v0 = k0
    omega = packet.energy
    return omega, quantum_medium(0.0, omega), quantum_medium(step.height, omega)


def _broadening_record(packet, distance):
    b = broadening(packet, distance)
    return {
        "t_broad": b.t_broad,
        "t_prop": b.t_prop,
        "fresnel_f": b.fresnel_f,
        "regime": b.regime,
        "width": b.width,
        "wavelength": b.wavelength,
        "distance_L": b.distance,
    }


def run_snell(cfg: RunConfig) -> dict:
    omega, m1, m2 = _media(cfg.packet, cfg.step)
    theta2 = snell_spacetime(m1, m2, omega, cfg.alpha_v, cfg.theta1)
    # same index profile without dispersion, for the opposite-bending comparison
    flat1, flat2 = DispersiveMedium(m1.n), DispersiveMedium(m2.n)
    theta2_flat = snell_spacetime(flat1, flat2, omega, cfg.alpha_v, cfg.theta1)
    report = {
        "omega": omega,
        "n1": m1.n,
        "n2": m2.n,
        "dn_domega1": m1.dn_domega,
        "dn_domega2": m2.dn_domega,
        "alpha_v": cfg.alpha_v,
        "theta1_deg": _deg(cfg.theta1),
        "theta2_deg": _deg(theta2),
        "theta2_nondispersive_deg": _deg(theta2_flat),
        "group_velocity1": group_velocity(m1, omega, cfg.alpha_v, cfg.packet.v0),
        "group_velocity2": group_velocity(m2, omega, cfg.alpha_v, cfg.packet.v0),
    }
    try:
        report["theta2_spatial_deg"] = _deg(snell_spatial(m1.n, m2.n, cfg.theta1))
    except RefractionError as exc:
        report["theta2_spatial_deg"] = None
        report["spatial_note"] = str(exc)
    return report


def _step_rays(cfg: RunConfig):
    return predict_worldlines(cfg.packet, cfg.step)


def _spinor_rays(cfg: RunConfig):
    up = predict_worldlines(cfg.packet, cfg.zeeman.up, label="transmitted-up")
    down = predict_worldlines(cfg.packet, cfg.zeeman.down, label="transmitted-down")
    rays = [up.by_label("incident"), up.by_label("transmitted-up")]
    if not down.total_reflection:
        rays.append(down.by_label("transmitted-down"))
    return rays


def run_step(cfg: RunConfig, out_dir: Path | None, threads: int) -> dict:
    packet, step, grid = cfg.packet, cfg.step, cfg.grid
    fan = _step_rays(cfg)
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        density, _ = evolve_step(packet, step, cfg.quad, grid, threads=threads)
    row_norms = density.row_norms()
    left = regional_norms(density, "left")
    right = regional_norms(density, "right")
    spec_r, spec_t, spec_v = spectral_split(packet, step, cfg.quad)

    fits = {}
    fit_in = fit_worldline(density, packet.v0, "left", "forward")
    fits["incident"] = _fit_record(fit_in)
    fit_out = None
    if right[-1] > 1e-3:
        fit_out = fit_worldline(density, packet.v0, "right", "forward")
        fits["transmitted"] = _fit_record(fit_out)
    if left[-1] > 1e-3:
        fits["reflected"] = _fit_record(fit_worldline(density, packet.v0, "left", "backward"))

    report = {
        "ray_model": _ray_record(fan),
        "fits": fits,
        "norms": {
            "reflected": float(left[-1]),
            "transmitted": float(right[-1]),
            "row_norm_min": float(row_norms.min()),
            "row_norm_max": float(row_norms.max()),
        },
        "spectral": {
            "reflected": spec_r,
            "transmitted": spec_t,
            "mean_transmitted_velocity": spec_v,
        },
        "broadening": _broadening_record(packet, cfg.distance_L),
        "warnings": [str(w.message) for w in caught],
    }
    if not fan.total_reflection and fit_out is not None:
        omega, m1, m2 = _media(packet, step)
        predicted = fan.by_label("transmitted")
        report["snell_check"] = {
            "n1": m1.n,
            "n2": m2.n,
            "predicted_transmitted_angle_deg": _deg(predicted.angle),
            "measured_transmitted_angle_deg": _deg(fit_out.angle),
            "measured_incident_angle_deg": _deg(fit_in.angle),
            "discrepancy": check_spacetime_snell(fit_in, fit_out, m1, m2),
        }
    _write_outputs(cfg, out_dir, {"density": density}, fan)
    return report


def run_spinor(cfg: RunConfig, out_dir: Path | None, threads: int) -> dict:
    packet, zeeman, grid = cfg.packet, cfg.zeeman, cfg.grid
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        total, up, down = evolve_spinor(cfg.spinor, zeeman, cfg.quad, grid, threads=threads)
    x = grid.x
    channels = {}
    for name, density, step in (("up", up, zeeman.up), ("down", down, zeeman.down)):
        record = {"predicted_velocity": None}
        try:
            kp = math.sqrt(packet.k0**2 - 2 * step.height)
            record["predicted_velocity"] = kp
        except ValueError:
            pass
        right = regional_norms(density, "right")
        record["transmitted_norm"] = float(right[-1])
        if right[-1] > 1e-3 * max(float(density.row_norms()[0]), 1e-300):
            fit = fit_worldline(density, packet.v0, "right", "forward", label=f"transmitted-{name}")
            record["fit"] = _fit_record(fit)
            row = completion_row(right)
            _, _, width = density_moments(density.values[row], x, "right")
            record["width_ratio_measured"] = width / packet.rms_width
            record["width_ratio_time"] = float(grid.t[row])
        channels[name] = record
    report = {
        "channels": channels,
        "norms": {
            "row_norm_min": float(total.row_norms().min()),
            "row_norm_max": float(total.row_norms().max()),
            "reflected": float(regional_norms(total, "left")[-1]),
            "transmitted": float(regional_norms(total, "right")[-1]),
        },
        "broadening": _broadening_record(packet, cfg.distance_L),
        "warnings": [str(w.message) for w in caught],
    }
    try:
        ratio_up, ratio_down = width_ratio(packet.k0, zeeman)
        report["width_ratios_predicted"] = {"up": ratio_up, "down": ratio_down}
    except EvanescentRegime as exc:
        report["width_ratios_predicted"] = None
        report["width_ratio_note"] = str(exc)
    rays = _spinor_rays(cfg)
    _write_outputs(cfg, out_dir, {"density": total, "density_up": up, "density_down": down}, rays)
    return report


def _write_outputs(cfg: RunConfig, out_dir: Path | None, fields: dict, rays) -> None:
    if out_dir is None:
        return
    if "csv" in cfg.outputs:
        for name, density in fields.items():
            write_csv(density, out_dir / f"{name}.csv")
    if "heatmap" in cfg.outputs:
        render_heatmap(fields["density"], cfg.heatmap, list(rays), out_dir / "density.pgm")


def run(cfg: RunConfig, out_dir=None, threads: int = 1) -> tuple[int, dict]:
    """Execute ``cfg`` end to end; returns (exit status, report)."""
    out = None if out_dir is None else Path(out_dir)
    if out is not None:
        out.mkdir(parents=True, exist_ok=True)
    if cfg.mode == "snell":
        body = run_snell(cfg)
    elif cfg.mode == "ray":
        body = _ray_record(_step_rays(cfg))
    elif cfg.mode == "step":
        body = run_step(cfg, out, threads)
    else:
        body = run_spinor(cfg, out, threads)
    report = {"mode": cfg.mode, "inputs": cfg.as_dict(), "version": __version__, "result": body}
    if out is not None and "report" in cfg.outputs:
        write_report(report, out / "report.json")
    return EXIT_OK, report


def dumps_report(report: dict) -> str:
    return json.dumps(report, indent=2, sort_keys=True, allow_nan=False) + "\n"


def write_report(report: dict, path: Path) -> None:
    try:
        Path(path).write_text(dumps_report(report), encoding="utf-8")
    except OSError as exc:
        raise OSError(f"cannot write report to {path}: {exc.strerror or exc}") from exc


def _pair(text: str, n: int, kind, flag: str):
    parts = text.split(",")
    if len(parts) != n:
        raise ConfigError(f"{flag} expects {n} comma-separated values, got {text!r}")
    try:
        return [kind(p) for p in parts]
    except ValueError:
        raise ConfigError(f"{flag}: cannot parse {text!r}") from None


def _load_document(args) -> dict:
    doc: dict = {}
    if args.config:
        try:
            text = Path(args.config).read_text(encoding="utf-8")
        except OSError as exc:
            raise OSError(f"cannot read config {args.config}: {exc.strerror or exc}") from exc
        try:
            doc = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{args.config}: invalid JSON: {exc.msg} (line {exc.lineno})") from None
        if not isinstance(doc, dict):
            raise ConfigError(f"{args.config}: configuration must be a JSON object")
    if args.preset:
        doc["preset"] = args.preset
    if not doc:
        raise ConfigError("give --config and/or --preset")
    return doc


def _config_from_args(args) -> RunConfig:
    doc = _load_document(args)
    mode = SUBCOMMAND_MODES[args.command]
    if "mode" in doc and doc["mode"] != mode:
        raise ConfigError(f"config mode {doc['mode']!r} conflicts with subcommand {args.command!r}")
    merged = resolve(doc)
    # snell and ray are views of a step setup; step and spinor runs are not interchangeable
    preset_mode = merged.get("mode")
    if {preset_mode, mode} == {"step", "spinor"}:
        raise ConfigError(f"preset {doc['preset']!r} is a {preset_mode} setup, not {mode}")
    merged["mode"] = mode
    if args.nodes is not None:
        merged["n_nodes"] = args.nodes
    if args.grid:
        merged["nx"], merged["nt"] = _pair(args.grid, 2, int, "--grid")
    if args.window:
        merged["x_min"], merged["x_max"], merged["t_min"], merged["t_max"] = _pair(
            args.window, 4, float, "--window"
        )
    outputs = list(merged["outputs"])
    for flag, name in (("csv", "csv"), ("pgm", "heatmap"), ("report", "report")):
        if getattr(args, flag) and name not in outputs:
            outputs.append(name)
    merged["outputs"] = outputs
    return build(merged)


def _cmd_render(args) -> int:
    density = read_csv(args.input)
    rays = None
    gamma, normalization = args.gamma, args.normalization
    if args.config or args.preset:
        doc = _load_document(args)
        merged = resolve(doc)
        merged.update(
            nx=density.grid.nx, nt=density.grid.nt,
            x_min=density.grid.x_min, x_max=density.grid.x_max,
            t_min=density.grid.t_min, t_max=density.grid.t_max,
        )
        cfg = build(merged)
        rays = _spinor_rays(cfg) if cfg.mode == "spinor" else list(_step_rays(cfg))
    from .config import HeatmapSpec

    spec = HeatmapSpec.for_grid(
        density.grid, gamma=gamma, overlay_rays=rays is not None, normalization=normalization
    )
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    render_heatmap(density, spec, rays, out / args.output)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="spacetime-refraction",
        description="Wave-packet scattering off potential steps and refraction in spacetime.",
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", help="flat JSON run configuration")
        p.add_argument("--preset", help="fig2, fig3 or fig4")
        p.add_argument("--out-dir", default=".", help="directory for output files")

    for name in SUBCOMMAND_MODES:
        p = sub.add_parser(name)
        common(p)
        p.add_argument("--csv", action="store_true", help="write density CSV")
        p.add_argument("--pgm", action="store_true", help="write PGM heatmap")
        p.add_argument("--report", action="store_true", help="write report.json")
        p.add_argument("--nodes", type=int, help="number of k quadrature nodes")
        p.add_argument("--grid", help="nx,nt")
        p.add_argument("--window", help="xmin,xmax,tmin,tmax")
        p.add_argument("--threads", type=int, default=1, help="worker threads (wall time only)")

    p = sub.add_parser("render", help="render a density CSV as a PGM heatmap")
    common(p)
    p.add_argument("--input", required=True, help="density CSV written by simulate-*")
    p.add_argument("--output", default="heatmap.pgm")
    p.add_argument("--gamma", type=float, default=0.5)
    p.add_argument("--normalization", default="global-max", choices=("global-max", "per-frame-max"))
    return parser


def _fail(code: int, exc: BaseException) -> int:
    err = {"error": {"type": type(exc).__name__, "message": str(exc), "exit_code": code}}
    print(json.dumps(err, sort_keys=True), file=sys.stderr)
    return code


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "render":
            return _cmd_render(args)
        cfg = _config_from_args(args)
        status, report = run(cfg, args.out_dir, threads=max(1, args.threads))
        sys.stdout.write(dumps_report(report))
        return status
    except ConfigError as exc:
        return _fail(EXIT_CONFIG, exc)
    except DomainError as exc:
        return _fail(EXIT_DOMAIN, exc)
    except OSError as exc:
        return _fail(EXIT_IO, exc)
    except ValueError as exc:
        # malformed input files (e.g. a CSV that does not parse)
        return _fail(EXIT_CONFIG, exc)


if __name__ == "__main__":
    sys.exit(main())
