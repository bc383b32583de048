"""Command-line interface: every module as a subcommand plus the pipeline.

Exit codes are stable per failure class: 0 success (and overall QC pass),
1 usage, 2 unreadable/invalid input, 3 QC or analysis failure (the data
was fine, the answer is "no"), 4 internal error.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
import traceback
from dataclasses import replace
from pathlib import Path

import numpy as np

from . import __version__
from .core import TimeSeries, resample_uniform
from .emi import BuzzPass, EmiConfig, PassKind, analyze_passes
from .errors import (
    AerosurveyError,
    MissingColumnError,
    NeverBelowFloorError,
    NeverSettlesError,
    NoFitAvailableError,
    NoIntersectionsError,
    PipelineStageError,
)
from .gridding import (
    compare_grids,
    grid_idw,
    read_asc,
    to_grayscale,
    write_asc,
    write_pgm,
)
from .io_csv import (
    CSV_SCHEMA_VERSION,
    SchemaKind,
    ingest_csv,
    read_spectra_csv,
    read_survey_lines,
    write_series_csv,
    write_spectra_csv,
)
from .pipeline import (
    REPORT_SCHEMA_VERSION,
    PipelineConfig,
    apply_seed_override,
    run_pipeline,
    write_survey_artifacts,
)
from .qc import (
    SpectraMatrix,
    crossover_analysis,
    diurnal_correct,
    fourth_difference,
    nasvd_denoise,
    nasvd_energy_fraction,
)
from .suspension import (
    FlightPlan,
    SimConfig,
    SuspensionGeometry,
    simulate_survey,
)
from .vibration import (
    IsolatorConfig,
    IsolatorKind,
    amplitude_spectrum,
    attenuation_db,
    reduction_factor,
    select_configuration,
)
from .core import LineRole

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_IO = 2
EXIT_QC = 3
EXIT_INTERNAL = 4

# analysis outcomes: the inputs were valid, the analysis says no
_ANALYSIS_ERRORS = (NeverBelowFloorError, NoFitAvailableError,
                    NeverSettlesError, NoIntersectionsError)

# column name on the CLI -> field key used by crossover_analysis
_FIELD_KEYS = {"k_pct": "K", "u_ppm": "U", "tmi_nT": "TMI"}
_FIELD_SCHEMAS = {"k_pct": SchemaKind.RAD, "u_ppm": SchemaKind.RAD,
                  "tmi_nT": SchemaKind.MAG}


def _emit(obj) -> None:
    print(json.dumps(obj, sort_keys=True, indent=2))


def _write_json(path, obj) -> None:
    Path(path).write_text(json.dumps(obj, sort_keys=True, indent=2) + "\n")


def _scalar(series: TimeSeries, column: str) -> TimeSeries:
    return TimeSeries(series.t, series.column(column), (column,))


# ---------------------------------------------------------------------------
# vib


def _cmd_vib_spectrum(args) -> int:
    series = ingest_csv(args.infile, SchemaKind.ACCEL).data
    if args.rate is not None:
        series = resample_uniform(series, args.rate)
    res = amplitude_spectrum(series, axis=args.axis,
                             prominence_fraction=args.prominence)
    with open(args.out, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(("freq_hz", "amplitude_ms2"))
        for f, a in zip(res.freqs, res.amplitudes):
            w.writerow((repr(float(f)), repr(float(a))))
    _emit({"out": str(args.out), "n_bins": len(res.freqs),
           "peaks": [{"freq_hz": f, "amplitude_ms2": a} for f, a in res.peaks]})
    return EXIT_OK


def _cmd_vib_compare(args) -> int:
    before = ingest_csv(args.before, SchemaKind.ACCEL).data
    after = ingest_csv(args.after, SchemaKind.ACCEL).data
    r = reduction_factor(before, after, axis=args.axis)
    _emit({"reduction_factor": r, "attenuation_db": attenuation_db(r)})
    return EXIT_OK


def _cmd_vib_rank(args) -> int:
    raw = json.loads(Path(args.config).read_text())
    candidates = [IsolatorConfig(kind=IsolatorKind(c["kind"]),
                                 count=int(c["count"]),
                                 mount_angle_deg=float(c.get("mount_angle_deg", 0.0)),
                                 intensity=float(c["intensity"]),
                                 damping_ratio=float(c["damping_ratio"]),
                                 stiffness=float(c["stiffness"]))
                  for c in raw]
    ranked = select_configuration(candidates, args.mass, args.freq)
    _emit({"payload_mass_kg": args.mass, "frequency_hz": args.freq,
           "ranking": [{"rank": i + 1, "kind": c.kind.value, "count": c.count,
                        "mount_angle_deg": c.mount_angle_deg,
                        "effectiveness": d}
                       for i, (c, d) in enumerate(ranked)]})
    return EXIT_OK


# ---------------------------------------------------------------------------
# emi


def _read_buzz_trace(path: Path) -> TimeSeries:
    """Buzz traces are mag CSVs or any two-column t_s,<value> file."""
    with open(path, newline="", encoding="utf-8") as fh:
        header = next(csv.reader(fh), None)
    if header is None:
        raise MissingColumnError(f"{path}: empty file")
    if "tmi_nT" in header:
        data = ingest_csv(path, SchemaKind.MAG).data
        return _scalar(data, "tmi_nT")
    if "t_s" not in header:
        raise MissingColumnError(f"{path}: no t_s column")
    value_col = [c for c in header if c != "t_s"]
    if not value_col:
        raise MissingColumnError(f"{path}: no value column")
    ti, vi = header.index("t_s"), header.index(value_col[-1])
    t, v = [], []
    with open(path, newline="", encoding="utf-8") as fh:
        rd = csv.reader(fh)
        next(rd)
        for row in rd:
            t.append(float(row[ti]))
            v.append(float(row[vi]))
    return TimeSeries(np.array(t), np.array(v), (value_col[-1],))


def _cmd_emi_buzz(args) -> int:
    spec = json.loads(Path(args.passes).read_text())
    base_dir = Path(args.passes).parent
    passes = []
    for entry in spec:
        p = Path(entry["csv_path"])
        if not p.is_absolute():
            p = base_dir / p
        passes.append(BuzzPass(float(entry["separation_m"]),
                               _read_buzz_trace(p),
                               PassKind(entry.get("kind", "overflight"))))
    cfg = EmiConfig(noise_floor=args.floor)
    anchors = tuple(args.at) if args.at else (8.0, 9.0, 10.0)
    result = analyze_passes(passes, cfg, detrend_window_s=args.window,
                            interference_at=anchors,
                            signal_scale=args.signal_scale)
    _write_json(args.out, result)
    _emit(result)
    return EXIT_OK


# ---------------------------------------------------------------------------
# sim


def _cmd_sim_survey(args) -> int:
    plan = (FlightPlan.from_dict(json.loads(Path(args.plan).read_text()))
            if args.plan else None)
    geometry = (SuspensionGeometry.from_dict(
        json.loads(Path(args.geom).read_text())) if args.geom else None)
    cfg = (SimConfig.from_dict(json.loads(Path(args.cfg).read_text()))
           if args.cfg else SimConfig())
    cfg = apply_seed_override(cfg)
    result = simulate_survey(plan, geometry, cfg)
    paths = write_survey_artifacts(result, args.out_dir)
    _emit({"out_dir": str(args.out_dir),
           "artifacts": sorted(paths),
           "seed": cfg.seed,
           "n_sensor_samples": len(result.mag_full),
           "effective_damping_ratio": result.effective_damping_ratio})
    return EXIT_OK


# ---------------------------------------------------------------------------
# qc


def _cmd_qc_d4(args) -> int:
    schema = _FIELD_SCHEMAS.get(args.field)
    if schema is None:
        raise ValueError(f"unsupported field: {args.field}")
    data = ingest_csv(args.infile, schema).data
    report = fourth_difference(_scalar(data, args.field),
                               threshold=args.threshold,
                               field_name=args.field)
    _write_json(args.out, report.to_dict())
    _emit(report.to_dict())
    return EXIT_OK if report.passed else EXIT_QC


def _cmd_qc_diurnal(args) -> int:
    rover = ingest_csv(args.rover, SchemaKind.MAG).data
    base = ingest_csv(args.base, SchemaKind.BASE).data
    corrected = diurnal_correct(rover, base, args.datum)
    write_series_csv(args.out, corrected)
    delta = rover.column("tmi_nT") - corrected.column("tmi_nT")
    _emit({"out": str(args.out), "datum_nt": args.datum,
           "rms_correction_nt": float(np.sqrt(np.mean(delta ** 2)))})
    return EXIT_OK


def _cmd_qc_tie(args) -> int:
    key = _FIELD_KEYS.get(args.field)
    if key is None:
        raise ValueError(f"unsupported field: {args.field}")
    schema = _FIELD_SCHEMAS[args.field]
    flights = read_survey_lines(args.flights, schema, LineRole.FLIGHT)
    ties = read_survey_lines(args.ties, schema, LineRole.TIE)
    records, report = crossover_analysis(list(flights), list(ties), key,
                                         args.tol)
    payload = {"report": report.to_dict(),
               "crossings": [{"easting_m": r.location.easting,
                              "northing_m": r.location.northing,
                              "flight": r.flight_value, "tie": r.tie_value,
                              "difference": r.difference} for r in records]}
    _write_json(args.out, payload)
    _emit(report.to_dict())
    return EXIT_OK if report.passed else EXIT_QC


def _cmd_qc_nasvd(args) -> int:
    counts = read_spectra_csv(args.infile)
    mat = SpectraMatrix(counts)
    denoised = nasvd_denoise(mat, args.k)
    write_spectra_csv(args.out, denoised.counts)
    _emit({"out": str(args.out), "k": args.k,
           "energy_fraction": nasvd_energy_fraction(mat, args.k),
           "n_spectra": int(counts.shape[0]),
           "n_channels": int(counts.shape[1])})
    return EXIT_OK


# ---------------------------------------------------------------------------
# grid


def _cmd_grid_make(args) -> int:
    schema = _FIELD_SCHEMAS.get(args.field)
    if schema is None:
        raise ValueError(f"unsupported field: {args.field}")
    data = ingest_csv(args.infile, schema).data
    x = data.column("easting_m")
    y = data.column("northing_m")
    v = data.column(args.field)
    radius = args.radius if args.radius is not None else 4.0 * args.cell
    g = grid_idw(x, y, v, args.cell, radius, power=args.power)
    write_asc(g, args.out)
    arts = [str(args.out)]
    if args.pgm:
        write_pgm(to_grayscale(g), args.pgm)
        arts.append(str(args.pgm))
    _emit({"out": arts, "shape": list(g.shape),
           "cell_size": args.cell, "search_radius": radius,
           "valid_fraction": float(np.mean(g.valid))})
    return EXIT_OK


def _cmd_grid_compare(args) -> int:
    a = read_asc(args.a)
    b = read_asc(args.b)
    result = compare_grids(a, b)
    _write_json(args.out, result)
    _emit({k: result[k] for k in ("stddev_a", "stddev_b", "delta")})
    return EXIT_OK


# ---------------------------------------------------------------------------
# pipeline / version


def _cmd_pipeline(args) -> int:
    if args.config:
        cfg = PipelineConfig.from_dict(json.loads(Path(args.config).read_text()))
    else:
        cfg = PipelineConfig()
    if args.out_dir is not None:
        cfg = replace(cfg, out_dir=args.out_dir)
    if args.tie_tolerance is not None:
        cfg = replace(cfg, tie_tolerance=args.tie_tolerance)
    try:
        report = run_pipeline(cfg)
    except PipelineStageError as exc:
        if exc.partial_report is not None:
            out = Path(cfg.out_dir)
            out.mkdir(parents=True, exist_ok=True)
            (out / "report.json").write_text(exc.partial_report.to_json())
        print(f"error: {exc}", file=sys.stderr)
        if isinstance(exc.cause, _ANALYSIS_ERRORS):
            return EXIT_QC
        if isinstance(exc.cause, (AerosurveyError, OSError, ValueError)):
            return EXIT_IO
        return EXIT_INTERNAL
    _emit(report.to_dict())
    return EXIT_OK if report.overall_pass else EXIT_QC


def version_info() -> dict:
    return {"version": __version__,
            "csv_schema_version": CSV_SCHEMA_VERSION,
            "report_schema_version": REPORT_SCHEMA_VERSION}


def _cmd_version(args) -> int:
    info = version_info()
    if args.json:
        _emit(info)
    else:
        print(f"aerosurvey {info['version']} "
              f"(csv schema {info['csv_schema_version']}, "
              f"report schema {info['report_schema_version']})")
    return EXIT_OK


# ---------------------------------------------------------------------------
# parser


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="aerosurvey",
                                description="UAV aerogeophysical survey toolkit")
    sub = p.add_subparsers(dest="command", required=True)

    vib = sub.add_parser("vib", help="vibration analysis").add_subparsers(
        dest="subcommand", required=True)
    sp = vib.add_parser("spectrum", help="FFT amplitude spectrum of an axis")
    sp.add_argument("--in", dest="infile", required=True)
    sp.add_argument("--axis", default="z", choices=("x", "y", "z"))
    sp.add_argument("--rate", type=float, default=None,
                    help="resample to this rate (Hz) before the FFT")
    sp.add_argument("--prominence", type=float, default=0.10,
                    help="peak prominence as a fraction of the max bin")
    sp.add_argument("--out", required=True)
    sp.set_defaults(func=_cmd_vib_spectrum)
    vc = vib.add_parser("compare", help="before/after RMS reduction")
    vc.add_argument("--before", required=True)
    vc.add_argument("--after", required=True)
    vc.add_argument("--axis", default="z", choices=("x", "y", "z"))
    vc.set_defaults(func=_cmd_vib_compare)
    vr = vib.add_parser("rank", help="rank isolator configurations")
    vr.add_argument("--config", required=True, help="JSON list of candidates")
    vr.add_argument("--mass", type=float, required=True, help="payload kg")
    vr.add_argument("--freq", type=float, required=True, help="excitation Hz")
    vr.set_defaults(func=_cmd_vib_rank)

    emi = sub.add_parser("emi", help="EMI buzz test").add_subparsers(
        dest="subcommand", required=True)
    eb = emi.add_parser("buzz", help="noise-vs-separation analysis")
    eb.add_argument("--passes", required=True,
                    help="JSON list of {separation_m, kind, csv_path}")
    eb.add_argument("--floor", type=float, default=0.2, help="ambient nT")
    eb.add_argument("--window", type=float, default=1.0,
                    help="detrend window seconds")
    eb.add_argument("--at", type=float, action="append",
                    help="report interference percent at these separations")
    eb.add_argument("--signal-scale", type=float, default=54000.0,
                    help="signal scale for interference percent (nT)")
    eb.add_argument("--out", required=True)
    eb.set_defaults(func=_cmd_emi_buzz)

    sim = sub.add_parser("sim", help="survey simulator").add_subparsers(
        dest="subcommand", required=True)
    ss = sim.add_parser("survey", help="fly a plan, write sensor traces")
    ss.add_argument("--plan", default=None, help="plan JSON (default bundled)")
    ss.add_argument("--geom", default=None, help="geometry JSON")
    ss.add_argument("--cfg", default=None, help="simulator config JSON")
    ss.add_argument("--out-dir", required=True)
    ss.set_defaults(func=_cmd_sim_survey)

    qc = sub.add_parser("qc", help="data quality control").add_subparsers(
        dest="subcommand", required=True)
    d4 = qc.add_parser("d4", help="4th-difference spike test")
    d4.add_argument("--in", dest="infile", required=True)
    d4.add_argument("--field", default="tmi_nT")
    d4.add_argument("--threshold", type=float, default=None)
    d4.add_argument("--out", required=True)
    d4.set_defaults(func=_cmd_qc_d4)
    di = qc.add_parser("diurnal", help="base-station diurnal correction")
    di.add_argument("--rover", required=True)
    di.add_argument("--base", required=True)
    di.add_argument("--datum", type=float, required=True)
    di.add_argument("--out", required=True)
    di.set_defaults(func=_cmd_qc_diurnal)
    tie = qc.add_parser("tie", help="tie-line crossover differences")
    tie.add_argument("--flights", required=True, help="directory of line CSVs")
    tie.add_argument("--ties", required=True, help="directory of tie CSVs")
    tie.add_argument("--field", default="tmi_nT",
                     choices=sorted(_FIELD_KEYS))
    tie.add_argument("--tol", type=float, required=True)
    tie.add_argument("--out", required=True)
    tie.set_defaults(func=_cmd_qc_tie)
    nv = qc.add_parser("nasvd", help="low-rank spectral denoising")
    nv.add_argument("--in", dest="infile", required=True)
    nv.add_argument("--k", type=int, required=True)
    nv.add_argument("--out", required=True)
    nv.set_defaults(func=_cmd_qc_nasvd)

    grid = sub.add_parser("grid", help="gridding and comparison").add_subparsers(
        dest="subcommand", required=True)
    gm = grid.add_parser("make", help="IDW grid from scattered samples")
    gm.add_argument("--in", dest="infile", required=True)
    gm.add_argument("--field", default="tmi_nT")
    gm.add_argument("--cell", type=float, required=True, help="cell size m")
    gm.add_argument("--radius", type=float, default=None,
                    help="search radius m (default 4x cell)")
    gm.add_argument("--power", type=float, default=2.0)
    gm.add_argument("--pgm", default=None, help="also write grayscale PGM")
    gm.add_argument("--out", required=True)
    gm.set_defaults(func=_cmd_grid_make)
    gc = grid.add_parser("compare", help="grayscale spread of two grids")
    gc.add_argument("--a", required=True)
    gc.add_argument("--b", required=True)
    gc.add_argument("--out", required=True)
    gc.set_defaults(func=_cmd_grid_compare)

    pl = sub.add_parser("pipeline", help="simulate -> QC -> grid -> compare")
    pl.add_argument("--config", default=None, help="pipeline config JSON")
    pl.add_argument("--out-dir", default=None)
    pl.add_argument("--tie-tolerance", type=float, default=None)
    pl.set_defaults(func=_cmd_pipeline)

    ver = sub.add_parser("version", help="tool and schema versions")
    ver.add_argument("--json", action="store_true")
    ver.set_defaults(func=_cmd_version)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code in (0, None) else EXIT_USAGE
    try:
        return args.func(args)
    except _ANALYSIS_ERRORS as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_QC
    except (AerosurveyError, OSError, ValueError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except Exception:  # pragma: no cover - defensive
        traceback.print_exc()
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
