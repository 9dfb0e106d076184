"""Command-line front end.

Exit codes: 0 success, 1 runtime failure (unreadable file, dimension
mismatch, ...), 2 usage error (bad flag or configuration value). Every file
is written to a temporary name and renamed once complete.
"""

from __future__ import annotations

import argparse
import csv
import io
import sys
from pathlib import Path

import numpy as np

from haloslhe.bench import bench_engines, synthetic_image
from haloslhe.config import RunConfig, parse_config
from haloslhe.engine import tone_map
from haloslhe.errors import ConfigError, SlheError
from haloslhe.hvs import (
    DoGParams,
    StepEdgeSpec,
    measure_halo,
    perceived_luminance,
    sigma_sweep,
)
from haloslhe.imaging import ColorImage, atomic_write_bytes, encode_pnm, luminance_of, read_pnm
from haloslhe import plotting

CONFIG_FLAGS = ("sigma_min", "sigma_max", "radius", "kernel", "bins", "lut_levels",
                "engine", "policy", "alpha", "saturation")
SWEEP_HEADER = ["sigma", "policy", "light_amp", "dark_amp", "light_width", "dark_width"]


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: error: {message}")


def _float_list(text: str) -> list[float]:
    try:
        values = [float(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}")
    if not values:
        raise argparse.ArgumentTypeError("empty list")
    return values


def _int_list(text: str) -> list[int]:
    return [int(v) for v in _float_list(text)]


def _level_pair(text: str) -> tuple[float, float]:
    values = _float_list(text)
    if len(values) != 2:
        raise argparse.ArgumentTypeError(f"expected DARK,BRIGHT, got {text!r}")
    return values[0], values[1]


def _add_config_flags(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("run configuration (overrides --config)")
    g.add_argument("--config", type=Path, help="flat key = value file")
    for key in CONFIG_FLAGS:
        g.add_argument("--" + key.replace("_", "-"), dest=key, metavar="VALUE")


def _add_step_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--step", type=_level_pair, default=(200.0, 800.0),
                   metavar="DARK,BRIGHT", help="step-edge levels (0-1023)")
    p.add_argument("--width", type=int, default=256)
    p.add_argument("--height", type=int, default=256)
    p.add_argument("--edge-column", type=int, default=None)


def _add_dog_flags(p: argparse.ArgumentParser) -> None:
    d = DoGParams()
    p.add_argument("--sigma-center", type=float, default=d.sigma_center)
    p.add_argument("--sigma-surround", type=float, default=d.sigma_surround)
    p.add_argument("--surround-gain", type=float, default=d.surround_gain)
    p.add_argument("--response-gain", type=float, default=d.response_gain)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="haloslhe", description="Halo-controlled smoothed local histogram equalization")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("tonemap", help="tone map a PGM/PPM image")
    p.add_argument("input", type=Path)
    p.add_argument("output", type=Path)
    p.add_argument("--maxval", type=int, choices=(255, 65535), help="output depth (default: input's)")
    _add_config_flags(p)

    p = sub.add_parser("sweep", help="halo amplitudes over tonal widths on a step edge")
    p.add_argument("--sigmas", type=_float_list, default=[50.0, 100.0, 200.0, 500.0])
    p.add_argument("--adaptive", action="store_true",
                   help="add one adaptive row per policy using sigma-min/sigma-max")
    p.add_argument("--policies", default="paper,swapped")
    p.add_argument("--out", type=Path, required=True, help="CSV output")
    p.add_argument("--profiles", type=Path, help="directory for per-run output PGMs")
    p.add_argument("--figure", type=Path, help="PNG plot of amplitudes")
    _add_step_flags(p)
    _add_config_flags(p)

    p = sub.add_parser("halo-report", help="compare halos of two images of a known step edge")
    p.add_argument("original", type=Path)
    p.add_argument("processed", type=Path)
    p.add_argument("--edge-column", type=int, required=True)
    p.add_argument("--step", type=_level_pair, default=None, metavar="DARK,BRIGHT",
                   help="declared step levels (default: read from the original)")
    p.add_argument("--perceived", action="store_true",
                   help="also report halos after the lateral-inhibition model")
    p.add_argument("--out", type=Path, help="CSV output (default: stdout)")
    p.add_argument("--figure", type=Path, help="PNG plot of the edge profiles")
    _add_dog_flags(p)

    p = sub.add_parser("perceive", help="apply the lateral-inhibition (DoG) model")
    p.add_argument("input", type=Path)
    p.add_argument("output", type=Path)
    _add_dog_flags(p)

    p = sub.add_parser("bench", help="time the reference and binned engines")
    p.add_argument("--input", type=Path, help="PGM/PPM to benchmark (default: synthetic)")
    p.add_argument("--size", type=int, default=1024)
    p.add_argument("--radii", type=_int_list, default=[8, 64])
    p.add_argument("--engines", default="reference,binned")
    p.add_argument("--ref-rows", type=int, default=8)
    p.add_argument("--repeats", type=int, default=3)
    p.add_argument("--out", type=Path, help="CSV output (default: stdout)")
    _add_config_flags(p)
    return parser


def load_run_config(args) -> RunConfig:
    text = ""
    if args.config is not None:
        try:
            text = args.config.read_text()
        except OSError as exc:
            raise UsageError(f"cannot read config {args.config}: {exc}")
    return parse_config(text, {k: getattr(args, k) for k in CONFIG_FLAGS})


def _csv_text(header, rows) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(rows)
    return buf.getvalue()


def _report_fields(report):
    return [f"{report.light_amp:.3f}", f"{report.dark_amp:.3f}",
            report.light_width, report.dark_width]


def _dog(args) -> DoGParams:
    return DoGParams(args.sigma_center, args.sigma_surround, args.surround_gain, args.response_gain)


def cmd_tonemap(args) -> None:
    cfg = load_run_config(args)
    image = read_pnm(args.input)
    out = tone_map(image, cfg.spatial_kernel(), cfg.sigma_params(), cfg.equalizer(), cfg.saturation)
    atomic_write_bytes(args.output, encode_pnm(out, args.maxval or image.source_maxval or 255))


def cmd_sweep(args) -> None:
    cfg = load_run_config(args)
    spec = StepEdgeSpec(args.width, args.height, args.step[0], args.step[1], args.edge_column)
    kernel = cfg.spatial_kernel()
    rows = sigma_sweep(spec, args.sigmas, kernel)
    if args.adaptive:
        policies = [p.strip() for p in args.policies.split(",") if p.strip()]
        rows += sigma_sweep(spec, [], kernel, cfg.sigma_params(), policies)

    outputs = {args.out: _csv_text(SWEEP_HEADER, [[r.sigma, r.policy, *_report_fields(r.report)]
                                                  for r in rows]).encode()}
    if args.figure:
        outputs[args.figure] = plotting.sweep_figure(rows)
    if args.profiles:
        args.profiles.mkdir(parents=True, exist_ok=True)
        for r in rows:
            name = f"sweep_{r.policy}_{r.sigma.replace(':', '-')}.pgm"
            outputs[args.profiles / name] = encode_pnm(r.output, 65535)
    for path, payload in outputs.items():
        atomic_write_bytes(path, payload)


def _as_plane(image):
    return luminance_of(image) if isinstance(image, ColorImage) else image


def cmd_halo_report(args) -> None:
    original = _as_plane(read_pnm(args.original))
    processed = _as_plane(read_pnm(args.processed))
    if original.shape != processed.shape:
        raise SlheError(f"image sizes differ: {original.shape} vs {processed.shape}")
    if args.step is None:
        levels = original.levels()
        e = min(max(args.edge_column, 1), original.width - 1)
        dark, bright = float(np.median(levels[:, :e])), float(np.median(levels[:, e:]))
    else:
        dark, bright = args.step
    spec = StepEdgeSpec(original.width, original.height, dark, bright, args.edge_column)

    planes = {"original": original, "processed": processed}
    if args.perceived:
        dog = _dog(args)
        planes["perceived original"] = perceived_luminance(original, dog)
        planes["perceived processed"] = perceived_luminance(processed, dog)
    rows = [[label.replace(" ", "_"), *_report_fields(measure_halo(p, spec))]
            for label, p in planes.items()]
    text = _csv_text(["image", "light_amp", "dark_amp", "light_width", "dark_width"], rows)
    if args.out:
        atomic_write_bytes(args.out, text.encode())
    else:
        sys.stdout.write(text)
    if args.figure:
        atomic_write_bytes(args.figure, plotting.profile_figure(planes, spec))


def cmd_perceive(args) -> None:
    image = read_pnm(args.input)
    plane = _as_plane(image)
    out = perceived_luminance(plane, _dog(args))
    atomic_write_bytes(args.output, encode_pnm(out, image.source_maxval or 255))


def cmd_bench(args) -> None:
    cfg = load_run_config(args)
    if args.input:
        image = _as_plane(read_pnm(args.input))
    else:
        image = synthetic_image(args.size)
    engines = [e.strip() for e in args.engines.split(",") if e.strip()]
    rows = bench_engines(image, args.radii, engines, cfg.bins, cfg.lut_levels,
                         cfg.sigma_params(), args.ref_rows, args.repeats)
    text = _csv_text(["engine", "radius", "pixels", "seconds", "mpix_per_s", "max_err_levels"],
                     [[r.engine, r.radius, r.pixels, f"{r.seconds:.4f}", f"{r.mpix_per_s:.4f}",
                       f"{r.max_err_levels:.3f}"] for r in rows])
    if args.out:
        atomic_write_bytes(args.out, text.encode())
    else:
        sys.stdout.write(text)


COMMANDS = {
    "tonemap": cmd_tonemap,
    "sweep": cmd_sweep,
    "halo-report": cmd_halo_report,
    "perceive": cmd_perceive,
    "bench": cmd_bench,
}


def run_cli(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        COMMANDS[args.command](args)
    except (UsageError, ConfigError) as exc:
        print(exc, file=sys.stderr)
        return 2
    except SystemExit as exc:  # --help
        return int(exc.code or 0)
    except (SlheError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 0


def main() -> None:
    sys.exit(run_cli())


if __name__ == "__main__":
    main()
