"""Command-line front end: codebook dumps, one-shot simulation, decode, sweeps.

Every output lands under --out, carries the run manifest as comment lines,
and is byte-identical across reruns with the same config and seed. Exit
codes: 0 success, 1 validation, 2 runtime, 3 codebook ambiguity.
"""

from __future__ import annotations

import argparse
import hashlib
import sys
from dataclasses import dataclass, replace
from pathlib import Path

from . import __version__
from .codebook import Codebook, build_codebook, verify_code_uniqueness
from .config import RunConfig, load_config
from .decoder import decode_spectrum, detect
from .errors import ConfigError, FusionError, ScftError, ValidationError, WireFormatError
from .evaluate import EvalReport, acquire_reports, sweep
from .swarm_link import FILE_EXTENSION, decode_report, encode_report, fuse
from . import plots

EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_RUNTIME = 2
EXIT_AMBIGUOUS = 3


@dataclass
class RunManifest:
    """Provenance echoed as comment lines into every output file."""

    subcommand: str
    config_path: str
    config_sha256: str
    out_dir: str
    base_seed: int
    tool_version: str = __version__

    def header_lines(self) -> list[str]:
        return [
            f"# tool_version={self.tool_version}",
            f"# subcommand={self.subcommand}",
            f"# config={self.config_path}",
            f"# config_sha256={self.config_sha256}",
            f"# seed={self.base_seed}",
        ]


def _fmt(value) -> str:
    if isinstance(value, (int,)) and not isinstance(value, bool):
        return str(value)
    return format(float(value), ".12g")


def _write_table(
    path: Path,
    manifest: RunManifest,
    columns: list[str],
    rows,
    sep=",",
    extra_header: list[str] | None = None,
):
    lines = manifest.header_lines() + list(extra_header or [])
    lines.append(sep.join(columns))
    for row in rows:
        lines.append(sep.join(_fmt(v) for v in row))
    path.write_text("\n".join(lines) + "\n")


def _manifest(args, cfg: RunConfig | None = None) -> RunManifest:
    raw = Path(args.config).read_bytes()
    seed = args.seed
    if seed is None:
        seed = cfg.scenario.seed if cfg is not None else 0
    return RunManifest(
        subcommand=args.subcommand,
        config_path=str(args.config),
        config_sha256=hashlib.sha256(raw).hexdigest(),
        out_dir=str(args.out),
        base_seed=int(seed),
    )


def _out_dir(args) -> Path:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def cmd_codebook(args) -> int:
    cfg = load_config(args.config)
    out = _out_dir(args)
    manifest = _manifest(args, cfg)
    cb = build_codebook(cfg.swarm, allow_ambiguous=True)
    report = verify_code_uniqueness(cb)

    columns = ["node_id", "m_points", "zone_count"] + [f"q{q}" for q in range(cb.q_total)]
    rows = [
        [node_id, m, k] + [int(c) for c in cb.codes[row]]
        for row, (node_id, m, k) in enumerate(
            zip(cb.node_ids, cb.m_points, cb.zone_counts)
        )
    ]
    _write_table(out / "codebook.csv", manifest, columns, rows)
    _write_table(out / "collisions.csv", manifest, ["q", "q_prime"], report.pairs)
    plots.save_codebook_plot(cb, out / "codebook.png")

    if not report.empty:
        print(
            f"{len(report.pairs)} colliding channel pairs "
            f"(span {cb.span_channels} of {cb.q_total} channels)",
            file=sys.stderr,
        )
        return EXIT_AMBIGUOUS
    print(f"codebook: {cb.q_total} channels, no collisions")
    return EXIT_OK


def _run_decode(reports, cb: Codebook, cfg: RunConfig, allow_missing: bool):
    coded = fuse(reports, cb, allow_missing=allow_missing)
    est = decode_spectrum(coded, cb)
    est.detections = detect(
        est, cfg.policies.detect_threshold_db, cfg.policies.detect_absolute
    )
    return est


def _write_spectrum(out: Path, manifest: RunManifest, est):
    rows = [
        [q, q * est.resolution_hz, est.powers[q]] for q in range(est.powers.size)
    ]
    _write_table(out / "spectrum.csv", manifest, ["channel", "frequency_hz", "power"], rows)
    _write_table(
        out / "detections.csv",
        manifest,
        ["channel", "frequency_hz", "power"],
        [[d.channel, d.frequency_hz, d.power] for d in est.detections],
    )
    plots.save_spectrum_plot(est, out / "spectrum.png")


def cmd_simulate(args) -> int:
    cfg = load_config(args.config)
    out = _out_dir(args)
    manifest = _manifest(args, cfg)
    scenario = replace(cfg.scenario, seed=manifest.base_seed)
    cb = build_codebook(cfg.swarm)

    reports = acquire_reports(scenario, cfg.swarm, cfg.policies.peak)
    paths = []
    for rep in reports:
        path = out / f"node_{rep.node_id:03d}{FILE_EXTENSION}"
        path.write_bytes(encode_report(rep))
        paths.append(path)

    # decode from the serialized files, exercising the full exchange path
    wire_reports = [decode_report(p.read_bytes()) for p in paths]
    est = _run_decode(wire_reports, cb, cfg, args.allow_missing_node)
    _write_spectrum(out, manifest, est)
    print(
        f"simulate: {len(est.detections)} detections over {est.powers.size} channels; "
        f"outputs in {out}"
    )
    return EXIT_OK


def cmd_decode(args) -> int:
    cfg = load_config(args.config)
    out = _out_dir(args)
    manifest = _manifest(args, cfg)
    reports = []
    for name in args.reports:
        p = Path(name)
        if not p.exists():
            raise ConfigError(f"report file not found: {p}")
        reports.append(decode_report(p.read_bytes()))
    cb = build_codebook(cfg.swarm)
    est = _run_decode(reports, cb, cfg, args.allow_missing_node)
    _write_spectrum(out, manifest, est)
    print(f"decode: {len(est.detections)} detections; outputs in {out}")
    return EXIT_OK


def _write_sweep(out: Path, manifest: RunManifest, report: EvalReport, capture_duration_s: float):
    columns = [
        "axis_value",
        "rmse_relative",
        "p_detect",
        "p_false_alarm",
        "k_trials",
        "noise_floor_rel",
    ]
    rows = [
        [p.axis_value, p.rmse_relative, p.p_detect, p.p_false_alarm, p.k_trials, p.noise_floor_rel]
        for p in report.points
    ]
    extra = [
        f"# axis={report.axis_kind}",
        f"# k_trials={report.k_trials}",
        f"# capture_duration_s={_fmt(capture_duration_s)}",
    ]
    _write_table(out / "sweep.csv", manifest, columns, rows, extra_header=extra)
    _write_table(
        out / "sweep.dat", manifest, ["# " + " ".join(columns)], rows, sep=" ", extra_header=extra
    )
    plots.save_sweep_plot(report, out / "sweep.png")


def cmd_sweep(args) -> int:
    cfg = load_config(args.config)
    if args.k < 1:
        raise ConfigError(f"--k must be >= 1, got {args.k}")
    out = _out_dir(args)
    manifest = _manifest(args, cfg)
    if args.axis == "snr":
        values = cfg.sweep_snr_db
    else:
        values = cfg.sweep_resolution_hz
        if not values:
            raise ConfigError(
                "policies.sweep.resolution_hz: required for --axis resolution"
            )
    policies = replace(cfg.policies, off_grid=args.off_grid)
    report = sweep(
        args.axis,
        values,
        cfg.scenario,
        cfg.swarm,
        policies,
        k_trials=args.k,
        base_seed=manifest.base_seed,
    )
    _write_sweep(out, manifest, report, cfg.scenario.capture_duration_s)
    print(
        f"sweep: {len(report.points)} points x {args.k} trials in "
        f"{report.runtime_s:.1f} s; outputs in {out}"
    )
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="scft",
        description="Swarm sub-Nyquist wideband spectrum acquisition simulator.",
    )
    parser.add_argument("--version", action="version", version=f"scft {__version__}")
    sub = parser.add_subparsers(dest="subcommand", required=True)

    def common(p):
        p.add_argument("--config", required=True, help="JSON config path")
        p.add_argument("--out", default="out", help="output directory")
        p.add_argument("--seed", type=int, default=None, help="override the config seed")

    p = sub.add_parser("codebook", help="dump the code matrix and collision report")
    common(p)
    p.set_defaults(func=cmd_codebook)

    p = sub.add_parser("simulate", help="run the pipeline once, write reports and spectrum")
    common(p)
    p.add_argument(
        "--allow-missing-node",
        action="store_true",
        help="decode even if some configured node has no report",
    )
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("decode", help="fuse and decode existing .scft report files")
    common(p)
    p.add_argument("reports", nargs="+", help=f"{FILE_EXTENSION} report files")
    p.add_argument("--allow-missing-node", action="store_true")
    p.set_defaults(func=cmd_decode)

    p = sub.add_parser("sweep", help="Monte-Carlo sweep over SNR or resolution")
    common(p)
    p.add_argument("--axis", choices=["snr", "resolution"], default="snr")
    p.add_argument("--k", type=int, default=50, help="trials per axis point")
    p.add_argument(
        "--off-grid",
        action="store_true",
        help="draw trial carriers off the channel grid",
    )
    p.set_defaults(func=cmd_sweep)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, ValidationError, WireFormatError, FusionError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except FileNotFoundError as exc:
        print(f"error: file not found: {exc.filename}", file=sys.stderr)
        return EXIT_VALIDATION
    except ScftError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
