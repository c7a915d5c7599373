"""Command line front-end: ``ptmlens <subcommand> ...``.

Exit status is 0 on success, 2 on invalid input and 1 on internal failure.
"""

from __future__ import annotations

import argparse
import contextlib
import json
import logging
import math
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from . import control_io, metrics, plotting, tracking
from .cells import default_state_table, load_state_table, uniform_alphabet
from .field import ObservationGrid, efield_surface_map, radiation_pattern, write_pattern_csv, write_surface_csv
from .geometry import ConfigError, SystemConfig, load_config
from .synthesis import CodePattern, SteeringTarget, builtin_state_library, synthesize_pattern

log = logging.getLogger("ptmlens")

EXIT_OK, EXIT_INTERNAL, EXIT_INVALID = 0, 1, 2


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_INVALID, f"{self.prog}: error: {message}\n")


@contextlib.contextmanager
def _output(path):
    if path is None or path == "-":
        yield sys.stdout
    else:
        Path(path).parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w", newline="") as fh:
            yield fh


def _figpath(args, name) -> Path | None:
    if not getattr(args, "figdir", None):
        return None
    return Path(args.figdir) / name


def _config(args) -> SystemConfig:
    cfg = load_config(args.config) if args.config else SystemConfig()
    if getattr(args, "feed_distance", None):
        cfg = cfg.with_feed_distance(args.feed_distance)
    return cfg


def _table(args, pattern: CodePattern | None = None):
    if args.table:
        return load_state_table(args.table)
    if pattern is not None:
        return pattern.response_table()
    return default_state_table()


def _load_patterns(source: str | None) -> list[CodePattern]:
    if source is None or source == "builtin":
        return builtin_state_library()
    return [control_io.load_pattern(source)]


def cmd_synthesize(args) -> int:
    cfg = _config(args)
    if args.alphabet == "paper":
        if args.bits not in (None, 2):
            raise ValueError("the measured alphabet is 2-bit only")
        alpha = args.table and load_state_table(args.table) or default_state_table()
    else:
        alpha = uniform_alphabet(args.bits or 2)
    target = SteeringTarget.from_degrees(args.theta, args.phi)
    label = args.label or f"theta={args.theta:+g}"
    pat = synthesize_pattern(target, cfg, alpha, refine=args.refine, label=label, optimize_offset=args.optimize_offset)
    fmt = args.format
    if fmt == "auto":
        fmt = "text" if pat.shape == (6, 6) and pat.bits == 2 else "json"
    with _output(args.out) as fh:
        if fmt == "json":
            json.dump(control_io.pattern_to_json(pat), fh, indent=2)
            fh.write("\n")
        else:
            fh.write(control_io.emit_codebook([pat]))
    if fig := _figpath(args, "pattern.png"):
        plotting.plot_code_pattern(pat, fig)
        rp = radiation_pattern(pat, ObservationGrid.elevation_cut(1.0, target.phi), cfg)
        plotting.plot_cut([(label, rp.theta_deg, rp.magnitude)], Path(args.figdir) / "cut.png", markers=[args.theta])
    return EXIT_OK


def cmd_evaluate(args) -> int:
    cfg = _config(args)
    pat = control_io.load_pattern(args.pattern)
    table = _table(args, pat)
    if args.cut == "sphere":
        grid = ObservationGrid.sphere(args.step)
    else:
        if args.phi is not None:
            phi = math.radians(args.phi)
        else:
            phi = pat.target.phi if pat.target is not None else 0.0
        grid = ObservationGrid.elevation_cut(args.step, phi)
    rp = radiation_pattern(pat, grid, cfg, table)
    with _output(args.out) as fh:
        write_pattern_csv(rp, fh)
    if args.surface_z:
        sm = efield_surface_map(pat, args.surface_z, cfg, table)
        with _output(args.surface_out) as fh:
            write_surface_csv(sm, fh)
        if fig := _figpath(args, "surface.png"):
            plotting.plot_surface(sm, fig)
    if fig := _figpath(args, f"{args.cut}.png"):
        if args.cut == "sphere":
            plotting.plot_sphere(rp, fig, pat.label)
        else:
            plotting.plot_cut([(pat.label or "pattern", rp.theta_deg, rp.magnitude)], fig, pat.label)
    return EXIT_OK


def cmd_states(args) -> int:
    with _output(args.out) as fh:
        fh.write(control_io.builtin_codebook_text())
    if args.figdir:
        for p in builtin_state_library():
            plotting.plot_code_pattern(p, Path(args.figdir) / f"{p.label.replace(' ', '_')}.png")
    return EXIT_OK


def cmd_metrics(args) -> int:
    cfg = _config(args)
    pats = _load_patterns(args.pattern)
    rows, compare, cuts = [], [], []
    for p in pats:
        table = _table(args, p)
        m = metrics.compute_metrics(p, cfg, table, step_deg=args.step, sphere_step_deg=args.sphere_step)
        rows.append(m)
        if args.compare_paper and p.label.startswith("State ") and p.label[6:] in metrics.SIMULATED_REFERENCE:
            compare.append(metrics.compare_with_reference(p.label, m))
        if args.figdir:
            phi = p.target.phi if p.target is not None else 0.0
            rp = radiation_pattern(p, ObservationGrid.elevation_cut(args.step, phi), cfg, table)
            cuts.append((p.label or "pattern", rp.theta_deg, rp.magnitude))
    accuracy = metrics.measured_accuracy() if args.compare_paper else None
    with _output(args.out) as fh:
        if args.json:
            doc = {"metrics": [m.as_dict() for m in rows]}
            if args.compare_paper:
                doc["comparison"] = compare
                doc["accuracy"] = {**accuracy, "per_target": {str(k): v for k, v in accuracy["per_target"].items()}}
            json.dump(doc, fh, indent=2)
            fh.write("\n")
        else:
            fh.write(metrics.metrics_table(rows) + "\n")
            if args.compare_paper:
                fh.write("\nDeltas against the simulated reference (model - reference)\n")
                for c in compare:
                    fh.write(
                        f"{c['state']:>4}  lobe {c['d_main_lobe']:+7.2f} deg  "
                        f"SLL {_signed(c['d_sll'])} dB  D {_signed(c['d_directivity'])} dB  "
                        f"F/B {_signed(c['d_front_to_back'])} dB\n"
                    )
                fh.write("\nMeasured pointing accuracy\n")
                for t, a in accuracy["per_target"].items():
                    fh.write(f"  target {t:+4d} deg  accuracy {a:6.2f} %\n")
                flag = "  [DISCREPANCY]" if accuracy["discrepancy"] else ""
                fh.write(
                    f"  row mean {accuracy['row_mean']:.2f} %, quoted mean {accuracy['quoted_mean']} %{flag}\n"
                )
    if cuts and (fig := _figpath(args, "cuts.png")):
        plotting.plot_cut(cuts, fig, "elevation cuts")
    return EXIT_OK


def _signed(v):
    return "   -  " if v is None else f"{v:+6.2f}"


def cmd_track(args) -> int:
    cfg = _config(args)
    traj = tracking.load_trajectory(args.trajectory)
    table = _table(args)
    res = tracking.run_tracking(traj, cfg, table, args.mode, hysteresis_db=args.hysteresis, rx_gain_dbi=args.rx_gain)
    with _output(args.out) as fh:
        tracking.write_tracking_csv(res, fh)
    summary = json.dumps(res.summary, indent=2) + "\n"
    if args.summary:
        Path(args.summary).write_text(summary)
    else:
        sys.stderr.write(summary)
    if fig := _figpath(args, "tracking.png"):
        plotting.plot_tracking([res], fig, f"{args.mode} mode")
    return EXIT_OK


def cmd_export_frame(args) -> int:
    pat = control_io.load_pattern(args.pattern)
    frame = control_io.encode_bias_frame(pat)
    with _output(args.out) as fh:
        fh.write(frame.to_text())
        if args.word:
            fh.write(frame.line_word() + "\n")
    return EXIT_OK


def cmd_sweep(args) -> int:
    if args.steps < 1:
        raise ValueError("--steps must be >= 1")
    if args.freq_stop < args.freq_start:
        raise ValueError("--freq-stop must not be below --freq-start")
    cfg = _config(args)
    pats = _load_patterns(args.pattern)
    freqs = np.linspace(args.freq_start, args.freq_stop, args.steps)
    series = {p.label or "pattern": [] for p in pats}
    with _output(args.out) as fh:
        fh.write("freq_hz,label,main_lobe_deg,peak_mag,sll_db\n")
        for f in freqs:
            c = replace(cfg, frequency=float(f))
            for p in pats:
                phi = p.target.phi if p.target is not None else 0.0
                rp = radiation_pattern(p, ObservationGrid.elevation_cut(args.step, phi), c, _table(args, p))
                th, _, peak = metrics.main_lobe(rp)
                sll = metrics.side_lobe_level(rp)
                series[p.label or "pattern"].append(th)
                fh.write(f"{f:.6g},{p.label},{th:.4f},{peak:.6e},{'' if sll is None else f'{sll:.4f}'}\n")
    if fig := _figpath(args, "sweep.png"):
        plotting.plot_sweep(freqs, series, fig)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="system configuration JSON")
    common.add_argument("--table", help="cell state table JSON")
    common.add_argument("--feed-distance", type=float, help="override on-axis feed distance (m)")
    common.add_argument("--out", help="output file (default stdout)")
    common.add_argument("--figdir", help="directory for rendered figures")
    common.add_argument("-v", "--verbose", action="store_true")

    p = _Parser(prog="ptmlens", description="Programmable transmit-metamaterial lens workbench")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    s = sub.add_parser("synthesize", parents=[common], help="synthesize a code pattern for a direction")
    s.add_argument("--theta", type=float, required=True, help="elevation (deg)")
    s.add_argument("--phi", type=float, default=0.0, help="azimuth (deg)")
    s.add_argument("--bits", type=int, help="uniform alphabet bit depth (default 2)")
    s.add_argument("--alphabet", choices=["paper", "uniform"], default="uniform")
    s.add_argument("--refine", action="store_true", help="apply the received-field phase correction once")
    s.add_argument("--optimize-offset", action="store_true", help="choose the primary phase for peak field")
    s.add_argument("--label", default="")
    s.add_argument("--format", choices=["auto", "text", "json"], default="auto")
    s.set_defaults(func=cmd_synthesize)

    s = sub.add_parser("evaluate", parents=[common], help="radiation pattern of a code pattern as CSV")
    s.add_argument("--pattern", required=True)
    s.add_argument("--cut", choices=["elevation", "sphere"], default="elevation")
    s.add_argument("--step", type=float, default=1.0)
    s.add_argument("--phi", type=float, help="cut azimuth (deg); default from the pattern target")
    s.add_argument("--surface-z", type=float, help="also sample |E| on the plane z = Z (m)")
    s.add_argument("--surface-out", help="surface map CSV (default stdout)")
    s.set_defaults(func=cmd_evaluate)

    s = sub.add_parser("states", parents=[common], help="print the built-in state codebook")
    s.set_defaults(func=cmd_states)

    s = sub.add_parser("metrics", parents=[common], help="pattern metrics report")
    s.add_argument("--pattern", help="pattern file (default: all built-in states)")
    s.add_argument("--compare-paper", action="store_true", help="deltas against the reference tables")
    s.add_argument("--json", action="store_true")
    s.add_argument("--step", type=float, default=1.0)
    s.add_argument("--sphere-step", type=float, default=1.0)
    s.set_defaults(func=cmd_metrics)

    s = sub.add_parser("track", parents=[common], help="simulate receiver tracking")
    s.add_argument("--trajectory", required=True)
    s.add_argument("--mode", choices=["library", "resynthesize"], default="library")
    s.add_argument("--hysteresis", type=float, default=0.0, help="handover margin (dB)")
    s.add_argument("--rx-gain", type=float, default=0.0, help="receiver antenna gain (dBi)")
    s.add_argument("--summary", help="JSON summary file (default stderr)")
    s.set_defaults(func=cmd_track)

    s = sub.add_parser("export-frame", parents=[common], help="bias-line frame of a pattern")
    s.add_argument("--pattern", required=True)
    s.add_argument("--word", action="store_true", help="also print the 84-line word")
    s.set_defaults(func=cmd_export_frame)

    s = sub.add_parser("sweep", parents=[common], help="main lobe versus frequency")
    s.add_argument("--freq-start", type=float, required=True)
    s.add_argument("--freq-stop", type=float, required=True)
    s.add_argument("--steps", type=int, required=True)
    s.add_argument("--pattern", help="pattern file (default: all built-in states)")
    s.add_argument("--step", type=float, default=1.0)
    s.set_defaults(func=cmd_sweep)
    return p


_GLOBAL_VALUED = {"--config", "--table", "--feed-distance", "--out", "--figdir"}


def _hoist_globals(argv: list[str]) -> list[str]:
    """Move global options given before the subcommand to after it."""
    lead: list[str] = []
    i = 0
    while i < len(argv) and argv[i].startswith("-") and argv[i] not in ("-h", "--help"):
        opt = argv[i].split("=", 1)[0]
        take = 2 if opt in _GLOBAL_VALUED and "=" not in argv[i] else 1
        lead += argv[i : i + take]
        i += take
    if not lead or i >= len(argv):
        return argv
    return [argv[i], *lead, *argv[i + 1 :]]


def main(argv=None) -> int:
    parser = build_parser()
    argv = _hoist_globals(list(sys.argv[1:] if argv is None else argv))
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        return args.func(args)
    except (ValueError, ConfigError, KeyError, FileNotFoundError, json.JSONDecodeError) as exc:
        print(f"ptmlens: error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except Exception:
        log.exception("internal error")
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
