"""Command-line front end.

    scarsim lattice|quench|sweep|floquet|analyze [--config F | --preset NAME]
            [--out DIR] [--jobs N] ...

Exit codes: 0 success, 2 configuration problem, 3 capacity guard,
4 numerical guard.  Output files are byte-deterministic for identical
configurations (the manifest's wall-clock field aside).
"""

from __future__ import annotations

import argparse
import concurrent.futures
import json
import math
import sys
import time
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import __version__
from .analysis import (
    RIGIDITY_GRID,
    fit_damped_cosine,
    fit_decay_plane,
    fit_to_json,
    fourier_spectrum,
    imbalance,
    microstate_matrix,
    microstate_matrix_to_csv,
    plane_to_json,
    spectrum_to_csv,
    subharmonic_weight,
    weight_at,
)
from .config import (
    ExperimentConfig,
    RunManifest,
    config_hash,
    parse_config,
    serialize_config,
    set_by_path,
)
from .errors import CapacityError, ConfigError, GeometryError, NumericalError, ScarsimError
from .evolve import EvolutionConfig, QuenchResult, quench_from_csv, quench_to_csv, run_quench
from .floquet import pulsed_subharmonic_map, revival_fidelity_map
from .hamiltonian import DriveProfile, DriveShape, build_pxp, build_rydberg, build_sw2
from .hilbert import (
    canonical_states,
    enumerate_blockaded,
    order_microstates,
    reflection_grouping,
)
from .lattice import (
    Lattice,
    blockade_radius,
    decay_predictors,
    lattice_to_json,
    optimal_detuning,
    predict_lifetime,
)
from .presets import NOTES, get_preset, preset_names

_REF_ALPHA, _REF_BETA, _REF_INV_TAU0 = 0.72, 0.58, 0.4


def _g17(x: float) -> str:
    return format(float(x), ".17g")


def _csv_field(s: str) -> str:
    if any(ch in s for ch in ',"\r\n'):
        return '"' + s.replace('"', '""') + '"'
    return s


def _load_document(args) -> dict:
    if bool(args.config) == bool(args.preset):
        raise ConfigError("exactly one of --config or --preset is required")
    if args.preset:
        try:
            return get_preset(args.preset)
        except KeyError:
            raise ConfigError(
                f"unknown preset {args.preset!r}; available: {', '.join(preset_names())}"
            ) from None
    path = Path(args.config)
    if not path.exists():
        raise ConfigError(f"config file not found: {path}")
    try:
        return json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config is not valid JSON: {exc}") from exc


@dataclass
class SystemBundle:
    lat: Lattice
    basis: object
    parts: object
    drive: DriveProfile
    psi0: np.ndarray


def _build_system(cfg: ExperimentConfig) -> SystemBundle:
    if cfg.physical is None:
        raise ConfigError("physical: section is required for dynamics commands")
    lat = cfg.lattice.build()
    basis = enumerate_blockaded(lat)
    if cfg.model == "rydberg":
        parts = build_rydberg(lat, basis, cfg.physical, cutoff=cfg.cutoff)
    elif cfg.model == "pxp":
        parts = build_pxp(lat, basis, cfg.physical)
    else:
        parts = build_sw2(lat, basis, cfg.physical)
    drive = cfg.resolve_drive(lat)
    af1, af2, ggg = canonical_states(lat)
    state = {"AF1": af1, "AF2": af2, "GGG": ggg}[cfg.initial_state]
    psi0 = np.zeros(basis.dim, dtype=complex)
    psi0[basis.index_of(state)] = 1.0
    return SystemBundle(lat=lat, basis=basis, parts=parts, drive=drive, psi0=psi0)


def _resolve_cuts(cfg: ExperimentConfig, lat: Lattice) -> tuple:
    cuts = []
    for cut in cfg.observables.entropy_cuts:
        if cut == "half":
            cuts.append(tuple(range(lat.n_sites // 2)))
        else:
            cuts.append(tuple(cut))
    return tuple(cuts)


def _geometry_report(cfg: ExperimentConfig) -> dict:
    lat = cfg.lattice.build()
    report: dict = {
        "kind": lat.kind,
        "n_sites": lat.n_sites,
        "n_sublattice_a": int((lat.sublattice == 0).sum()),
        "n_sublattice_b": int((lat.sublattice == 1).sum()),
        "periodic": lat.periodic,
    }
    if cfg.physical is not None:
        p = cfg.physical
        dq = optimal_detuning(lat, p)
        x, y = decay_predictors(lat, p)
        rb, arb = blockade_radius(p)
        report.update({
            "omega_rad_us": p.omega,
            "v0_rad_us": p.v0,
            "delta_q_opt_rad_us": dq,
            "delta_q_opt_over_v0": dq / p.v0,
            "delta_q_opt_over_omega": dq / p.omega,
            "x_mhz": x,
            "y_mhz": y,
            "rb_over_a": rb,
            "a_over_rb": arb,
            "predicted_tau_us": predict_lifetime(
                x, y, _REF_ALPHA, _REF_BETA, 1.0 / _REF_INV_TAU0),
        })
    return report


def _write(path: Path, text: str, outputs: list[str]) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text)
    outputs.append(path.name)


def cmd_lattice(doc: dict, out: Path) -> int:
    cfg = parse_config(doc)
    t0 = time.perf_counter()
    report = _geometry_report(cfg)
    lat = cfg.lattice.build()
    outputs: list[str] = []
    _write(out / "lattice.json", lattice_to_json(lat) + "\n", outputs)
    _write(out / "geometry.json", json.dumps(report, sort_keys=True, indent=2) + "\n",
           outputs)
    _write(out / "resolved_config.json", serialize_config(cfg), outputs)
    manifest = RunManifest(config_hash=config_hash(doc), toolkit_version=__version__,
                           outputs=outputs, wall_clock_s=time.perf_counter() - t0)
    (out / "manifest.json").write_text(manifest.to_json())
    print(json.dumps(report, sort_keys=True, indent=2))
    return 0


def _analyze_quench(result: QuenchResult, drive: DriveProfile) -> tuple[dict, str | None]:
    """Fit and spectral summary; returns (analysis dict, spectrum csv or None)."""
    analysis: dict = {}
    series = imbalance(result)
    try:
        fit = fit_damped_cosine(series, result.times)
        analysis["fit"] = json.loads(fit_to_json(fit))
    except ScarsimError as exc:
        analysis["fit_error"] = str(exc)
    spectrum_csv = None
    if drive.shape in (DriveShape.COSINE, DriveShape.SQUARE):
        spec = fourier_spectrum(series, result.times,
                                calibration_omega=drive.omegam / 2.0)
        spectrum_csv = spectrum_to_csv(spec)
        analysis["omegam_rad"] = drive.omegam
        analysis["subharmonic_weight"] = subharmonic_weight(spec, drive.omegam)
        analysis["fourth_subharmonic_weight"] = subharmonic_weight(
            spec, drive.omegam, order=4)
        if drive.omegam <= spec.omegas[-1]:
            analysis["harmonic_weight"] = weight_at(spec, drive.omegam)
        analysis["peak_omega"] = spec.peak_omega()
    elif len(result.times) >= 20:
        spec = fourier_spectrum(series, result.times)
        spectrum_csv = spectrum_to_csv(spec)
        analysis["peak_omega"] = spec.peak_omega()
    return analysis, spectrum_csv


def _run_single_quench(cfg: ExperimentConfig) -> tuple[SystemBundle, QuenchResult, dict, str | None]:
    if cfg.evolution is None:
        raise ConfigError("evolution: section is required for quench runs")
    sys_ = _build_system(cfg)
    ev = cfg.evolution
    run_cfg = EvolutionConfig(total_time=ev.total_time, dt=ev.dt,
                              record_stride=ev.record_stride,
                              krylov_dim=ev.krylov_dim)
    cuts = _resolve_cuts(cfg, sys_.lat)
    result = run_quench(sys_.lat, sys_.basis, sys_.parts, sys_.drive, sys_.psi0,
                        run_cfg, entropy_cuts=cuts,
                        record_probs=cfg.observables.microstates)
    analysis, spectrum_csv = _analyze_quench(result, sys_.drive)
    return sys_, result, analysis, spectrum_csv


def cmd_quench(doc: dict, out: Path) -> int:
    cfg = parse_config(doc)
    t0 = time.perf_counter()
    sys_, result, analysis, spectrum_csv = _run_single_quench(cfg)
    outputs: list[str] = []
    _write(out / "quench.csv", quench_to_csv(result), outputs)
    _write(out / "lattice.json", lattice_to_json(sys_.lat) + "\n", outputs)
    _write(out / "resolved_config.json", serialize_config(cfg), outputs)
    if spectrum_csv is not None:
        _write(out / "spectrum.csv", spectrum_csv, outputs)
    _write(out / "analysis.json",
           json.dumps(analysis, sort_keys=True, indent=2) + "\n", outputs)
    if cfg.observables.microstates:
        ordering = order_microstates(reflection_grouping(sys_.basis, sys_.lat))
        matrix = microstate_matrix(result, ordering)
        _write(out / "microstates.csv",
               microstate_matrix_to_csv(result.times, matrix), outputs)
    manifest = RunManifest(config_hash=config_hash(doc), toolkit_version=__version__,
                           outputs=outputs, wall_clock_s=time.perf_counter() - t0)
    (out / "manifest.json").write_text(manifest.to_json())
    print(f"quench complete: {len(result.times)} snapshots, dim {sys_.basis.dim}")
    return 0


def _sweep_points(cfg: ExperimentConfig) -> list[dict]:
    """Grid points in deterministic order (first axis outer, second inner)."""
    axes = cfg.sweep
    if not axes:
        raise ConfigError("sweep: at least one axis is required")
    points = []
    if len(axes) == 1:
        for v in axes[0].grid:
            points.append({axes[0].parameter: v})
    else:
        for v0 in axes[0].grid:
            for v1 in axes[1].grid:
                points.append({axes[0].parameter: v0, axes[1].parameter: v1})
    return points


def _sweep_worker(payload: tuple[str, dict]) -> dict:
    """Run one sweep point; returns an aggregate row (never raises)."""
    doc_json, overrides = payload
    row: dict = {"status": "ok", "error": ""}
    try:
        doc = json.loads(doc_json)
        for path, value in overrides.items():
            doc = set_by_path(doc, path, value)
        cfg = parse_config(doc)
        sys_, result, analysis, _ = _run_single_quench(cfg)
        x, y = decay_predictors(sys_.lat, cfg.physical)
        row["dim"] = sys_.basis.dim
        row["x_mhz"] = x
        row["y_mhz"] = y
        fit = analysis.get("fit")
        if fit is not None and fit.get("converged"):
            row["omega_tilde"] = fit["omega_tilde"]
            row["tau"] = fit["tau"]
            row["inv_tau"] = 1.0 / fit["tau"]
        row["sub_weight"] = analysis.get("subharmonic_weight")
        row["harm_weight"] = analysis.get("harmonic_weight")
        row["fourth_weight"] = analysis.get("fourth_subharmonic_weight")
        row["quench_csv"] = quench_to_csv(result)
    except ScarsimError as exc:
        row["status"] = "error"
        row["error"] = f"{type(exc).__name__}: {exc}"
    return row


_AGG_COLUMNS = ("dim", "omega_tilde", "tau", "inv_tau", "sub_weight",
                "harm_weight", "fourth_weight", "x_mhz", "y_mhz")


def cmd_sweep(doc: dict, out: Path, jobs: int | None) -> int:
    cfg = parse_config(doc)
    t0 = time.perf_counter()
    points = _sweep_points(cfg)
    doc_json = json.dumps(doc, sort_keys=True)
    payloads = [(doc_json, pt) for pt in points]
    if jobs is not None and jobs <= 1:
        rows = [_sweep_worker(pl) for pl in payloads]
    else:
        with concurrent.futures.ProcessPoolExecutor(max_workers=jobs) as pool:
            rows = list(pool.map(_sweep_worker, payloads))

    outputs: list[str] = []
    axis_names = [ax.parameter for ax in cfg.sweep]
    header = ["point"] + axis_names + ["status", "error"] + list(_AGG_COLUMNS)
    lines = [",".join(header)]
    for k, (pt, row) in enumerate(zip(points, rows)):
        csv_text = row.pop("quench_csv", None)
        if csv_text is not None:
            _write(out / f"point_{k:03d}" / "quench.csv", csv_text, outputs)
            outputs[-1] = f"point_{k:03d}/quench.csv"
        vals = [str(k)] + [_g17(pt[name]) for name in axis_names]
        vals += [row["status"], _csv_field(row.get("error", ""))]
        for col in _AGG_COLUMNS:
            v = row.get(col)
            vals.append("" if v is None else _g17(v))
        lines.append(",".join(vals))
    _write(out / "aggregate.csv", "\r\n".join(lines) + "\r\n", outputs)

    rigidity_csv = _rigidity_table(cfg, points, rows)
    if rigidity_csv is not None:
        _write(out / "rigidity.csv", rigidity_csv, outputs)

    _write(out / "resolved_config.json", serialize_config(cfg), outputs)
    n_err = sum(1 for r in rows if r["status"] != "ok")
    manifest = RunManifest(config_hash=config_hash(doc), toolkit_version=__version__,
                           outputs=outputs, wall_clock_s=time.perf_counter() - t0,
                           status="complete" if n_err == 0 else "partial")
    (out / "manifest.json").write_text(manifest.to_json())
    print(f"sweep complete: {len(points)} points, {n_err} failed")
    return 0


def _rigidity_table(cfg: ExperimentConfig, points: list[dict],
                    rows: list[dict]) -> str | None:
    """Aggregate subharmonic weights into rigidity when the drive-frequency
    axis matches the fixed 11-point grid exactly."""
    freq_axis = None
    other_axis = None
    for ax in cfg.sweep:
        if ax.parameter == "drive.omegam_over_omega" and \
                len(ax.grid) == len(RIGIDITY_GRID) and \
                np.allclose(ax.grid, RIGIDITY_GRID, atol=1e-9):
            freq_axis = ax
        else:
            other_axis = ax
    if freq_axis is None:
        return None
    groups: dict = {}
    for pt, row in zip(points, rows):
        if row["status"] != "ok" or row.get("sub_weight") is None:
            return None
        key = pt[other_axis.parameter] if other_axis else ""
        groups.setdefault(key, []).append(row["sub_weight"])
    name = other_axis.parameter if other_axis else "group"
    lines = [f"{name},rigidity"]
    for key, ws in groups.items():
        if len(ws) != len(RIGIDITY_GRID):
            return None
        lines.append(f"{_g17(key) if key != '' else ''},{_g17(sum(ws))}")
    return "\r\n".join(lines) + "\r\n"


def cmd_floquet(doc: dict, out: Path) -> int:
    cfg = parse_config(doc)
    if cfg.floquet is None:
        raise ConfigError("floquet: section is required for the floquet command")
    fq = cfg.floquet
    t0 = time.perf_counter()
    fn = revival_fidelity_map if fq.map == "revival" else pulsed_subharmonic_map
    values = fn(fq.l, fq.boundary, fq.epsilons, fq.taus,
                n_periods=fq.n_periods, initial_state=fq.initial_state)
    outputs: list[str] = []
    lines = ["epsilon,tau_omega,value"]
    for i, eps in enumerate(fq.epsilons):
        for j, tau in enumerate(fq.taus):
            lines.append(f"{_g17(eps)},{_g17(tau)},{_g17(values[i, j])}")
    _write(out / "map.csv", "\r\n".join(lines) + "\r\n", outputs)
    meta = {"l": fq.l, "boundary": fq.boundary, "map": fq.map,
            "n_periods": fq.n_periods, "initial_state": fq.initial_state,
            "epsilons": list(fq.epsilons), "taus_omega": list(fq.taus)}
    _write(out / "map_meta.json", json.dumps(meta, sort_keys=True, indent=2) + "\n",
           outputs)
    _write(out / "resolved_config.json", serialize_config(cfg), outputs)
    manifest = RunManifest(config_hash=config_hash(doc), toolkit_version=__version__,
                           outputs=outputs, wall_clock_s=time.perf_counter() - t0)
    (out / "manifest.json").write_text(manifest.to_json())
    print(f"floquet map complete: {values.shape[0]}x{values.shape[1]} points")
    return 0


def cmd_analyze(paths: list[str], mode: str, out: Path | None,
                omegam_rad: float | None) -> int:
    for raw_path in paths:
        path = Path(raw_path)
        if not path.exists():
            raise ConfigError(f"input file not found: {path}")
        dest = out if out is not None else path.parent
        dest.mkdir(parents=True, exist_ok=True)
        stem = path.stem
        if mode == "fit":
            result = quench_from_csv(path.read_text())
            fit = fit_damped_cosine(imbalance(result), result.times)
            (dest / f"{stem}_fit.json").write_text(fit_to_json(fit))
            print(fit_to_json(fit), end="")
        elif mode == "spectrum":
            result = quench_from_csv(path.read_text())
            calib = omegam_rad / 2.0 if omegam_rad else None
            spec = fourier_spectrum(imbalance(result), result.times,
                                    calibration_omega=calib)
            (dest / f"{stem}_spectrum.csv").write_text(spectrum_to_csv(spec))
            summary = {"peak_omega": spec.peak_omega()}
            if omegam_rad:
                summary["subharmonic_weight"] = subharmonic_weight(spec, omegam_rad)
                summary["fourth_subharmonic_weight"] = subharmonic_weight(
                    spec, omegam_rad, order=4)
            (dest / f"{stem}_analysis.json").write_text(
                json.dumps(summary, sort_keys=True, indent=2) + "\n")
            print(json.dumps(summary, sort_keys=True, indent=2))
        elif mode == "plane":
            pts = _plane_points_from_aggregate(path.read_text())
            fit = fit_decay_plane(pts)
            (dest / f"{stem}_plane.json").write_text(plane_to_json(fit))
            print(plane_to_json(fit), end="")
        else:
            raise ConfigError(f"unknown analyze mode {mode!r}")
    return 0


def _plane_points_from_aggregate(text: str) -> list[tuple[float, float, float]]:
    lines = [ln for ln in text.splitlines() if ln.strip()]
    header = lines[0].split(",")
    try:
        ix, iy, iv = (header.index(c) for c in ("x_mhz", "y_mhz", "inv_tau"))
        istat = header.index("status")
    except ValueError as exc:
        raise ConfigError(f"aggregate file lacks required columns: {exc}") from exc
    pts = []
    for ln in lines[1:]:
        cells = ln.split(",")
        if cells[istat] != "ok" or not cells[iv]:
            continue
        pts.append((float(cells[ix]), float(cells[iy]), float(cells[iv])))
    if len(pts) < 3:
        raise ConfigError("aggregate contains fewer than 3 fitted points")
    return pts


def _make_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="scarsim",
        description="Quench dynamics and driven stabilization in blockaded atom arrays",
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(sp, jobs=False):
        sp.add_argument("--config", help="path to a JSON configuration")
        sp.add_argument("--preset", help="name of a shipping preset")
        sp.add_argument("--out", default="out", help="output directory")
        sp.add_argument("--list-presets", action="store_true",
                        help="list preset names and exit")
        if jobs:
            sp.add_argument("--jobs", type=int, default=None,
                            help="worker processes for sweep points")

    add_common(sub.add_parser("lattice", help="geometry report and serialization"))
    add_common(sub.add_parser("quench", help="run a single quench"))
    add_common(sub.add_parser("sweep", help="run a parameter sweep"), jobs=True)
    add_common(sub.add_parser("floquet", help="pulsed-drive revival/subharmonic maps"))

    an = sub.add_parser("analyze", help="re-analyze stored results")
    an.add_argument("paths", nargs="+", help="stored quench.csv / aggregate.csv files")
    an.add_argument("--mode", required=True, choices=("fit", "spectrum", "plane"))
    an.add_argument("--out", default=None, help="output directory (default: alongside)")
    an.add_argument("--omegam-rad", type=float, default=None,
                    help="drive frequency in rad/us for weight columns")
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = _make_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "analyze":
            return cmd_analyze(args.paths, args.mode,
                               Path(args.out) if args.out else None,
                               args.omegam_rad)
        if args.list_presets:
            for name in preset_names():
                note = NOTES.get(name, "")
                print(f"{name}\t{note}")
            return 0
        doc = _load_document(args)
        out = Path(args.out)
        if args.command == "lattice":
            return cmd_lattice(doc, out)
        if args.command == "quench":
            return cmd_quench(doc, out)
        if args.command == "sweep":
            return cmd_sweep(doc, out, args.jobs)
        if args.command == "floquet":
            return cmd_floquet(doc, out)
        raise ConfigError(f"unknown command {args.command!r}")
    except (ConfigError, GeometryError) as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 2
    except CapacityError as exc:
        print(f"capacity guard: {exc}", file=sys.stderr)
        return 3
    except NumericalError as exc:
        print(f"numerical guard: {exc}", file=sys.stderr)
        return 4


if __name__ == "__main__":
    sys.exit(main())
