"""Halo measurement on synthetic step edges and a lateral-inhibition model.

Halo amplitudes are read off the column-mean profile of a processed vertical
step edge, relative to the plateau each side settles to far from the edge.
The perceived-luminance model adds a zero-DC centre-surround response to the
image, which produces Mach bands at edges; stacking it on an image that
already carries halos exaggerates them.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from haloslhe.errors import DimensionMismatchError, ParameterError
from haloslhe.imaging import SCALE, ImagePlane
from haloslhe.engine import equalize_reference
from haloslhe.localstats import SpatialKernel, gauss3box_filter, local_mean
from haloslhe.sigma import SigmaField, SigmaParams, build_sigma_field

# deviations at or below this many levels do not count toward halo width
WIDTH_THRESHOLD = 1.0


@dataclass(frozen=True)
class StepEdgeSpec:
    width: int = 256
    height: int = 256
    dark_level: float = 200.0
    bright_level: float = 800.0
    edge_column: int | None = None

    def __post_init__(self):
        if self.width < 1 or self.height < 1:
            raise ParameterError(f"invalid size {self.width}x{self.height}")
        if not 0 <= self.dark_level < self.bright_level <= SCALE.max_level:
            raise ParameterError(
                f"need 0 <= dark < bright <= {SCALE.max_level}, "
                f"got {self.dark_level}/{self.bright_level}")
        if self.edge_column is None:
            object.__setattr__(self, "edge_column", self.width // 2)
        if not 0 <= self.edge_column <= self.width:
            raise ParameterError(f"edge column {self.edge_column} outside 0..{self.width}")


@dataclass(frozen=True)
class HaloReport:
    light_amp: float = 0.0
    dark_amp: float = 0.0
    light_width: int = 0
    dark_width: int = 0


@dataclass(frozen=True)
class DoGParams:
    sigma_center: float = 1.0
    sigma_surround: float = 3.0
    surround_gain: float = 1.0
    response_gain: float = 1.0

    def __post_init__(self):
        if not 0 < self.sigma_center < self.sigma_surround:
            raise ParameterError("need 0 < sigma_center < sigma_surround")
        if not 0 < self.surround_gain <= 1:
            raise ParameterError("surround_gain must lie in (0, 1]")
        if self.response_gain < 0:
            raise ParameterError("response_gain must be >= 0")


def make_step_edge(spec: StepEdgeSpec) -> ImagePlane:
    row = np.where(np.arange(spec.width) < spec.edge_column, spec.dark_level, spec.bright_level)
    return ImagePlane.from_levels(np.tile(row, (spec.height, 1)))


def perceived_luminance(plane: ImagePlane, params: DoGParams = DoGParams()) -> ImagePlane:
    """Centre-surround (difference of Gaussians) response added to the image."""
    if params.response_gain == 0:
        return ImagePlane(plane.samples.copy())
    center = gauss3box_filter(plane, params.sigma_center).samples
    surround = gauss3box_filter(plane, params.sigma_surround).samples
    dog = center - params.surround_gain * surround
    return ImagePlane(np.clip(plane.samples + params.response_gain * dog, 0.0, 1.0))


def _longest_run(mask: np.ndarray) -> int:
    best = run = 0
    for m in mask:
        run = run + 1 if m else 0
        best = max(best, run)
    return best


def column_profile(plane: ImagePlane) -> np.ndarray:
    """Column means in level units."""
    return plane.levels().mean(axis=0)


def _plateau(levels: np.ndarray, cols: slice) -> float:
    return float(np.median(levels[:, cols]))


def measure_halo(processed: ImagePlane, spec: StepEdgeSpec) -> HaloReport:
    """Signed over/undershoot on either side of the edge, in level units."""
    if processed.shape != (spec.height, spec.width):
        raise DimensionMismatchError(
            f"processed image is {processed.shape}, edge spec is {(spec.height, spec.width)}")
    levels = processed.levels()
    profile = levels.mean(axis=0)
    e = spec.edge_column

    light_amp = dark_amp = 0.0
    light_width = dark_width = 0
    if e > 0:
        q = max(1, e // 4)
        dev = np.round(profile[:e] - _plateau(levels, slice(0, q)), 9)
        dark_amp = max(0.0, float(-dev.min()))
        dark_width = _longest_run(-dev > WIDTH_THRESHOLD)
    if e < spec.width:
        q = max(1, (spec.width - e) // 4)
        dev = np.round(profile[e:] - _plateau(levels, slice(spec.width - q, spec.width)), 9)
        light_amp = max(0.0, float(dev.max()))
        light_width = _longest_run(dev > WIDTH_THRESHOLD)
    return HaloReport(light_amp, dark_amp, light_width, dark_width)


@dataclass
class SweepRow:
    sigma: str
    policy: str
    report: HaloReport
    output: ImagePlane = field(repr=False)


def _label(x: float) -> str:
    return f"{x:g}"


def sigma_sweep(spec: StepEdgeSpec, sigmas: Sequence[float], kernel: SpatialKernel,
                params: SigmaParams | None = None,
                policies: Sequence[str] | None = None) -> list[SweepRow]:
    """Halo reports of the reference equalizer on a step edge.

    Without ``params`` every width in ``sigmas`` is applied uniformly, one row
    each. With ``params`` the adaptive field is built once per policy in
    ``policies`` (default: ``params.group_policy``) and ``sigmas`` is unused.
    """
    plane = make_step_edge(spec)
    rows = []
    if params is None:
        if len(sigmas) == 0:
            raise ParameterError("sigma list is empty")
        for s in sigmas:
            out = equalize_reference(plane, kernel, SigmaField.uniform(plane.shape, s))
            rows.append(SweepRow(_label(s), "uniform", measure_halo(out, spec), out))
        return rows

    mean = local_mean(plane, kernel)
    for policy in policies or (params.group_policy,):
        p = SigmaParams(params.sigma_min, params.sigma_max, policy)
        out = equalize_reference(plane, kernel, build_sigma_field(plane, mean, p))
        label = f"{_label(p.sigma_min)}:{_label(p.sigma_max)}"
        rows.append(SweepRow(label, policy, measure_halo(out, spec), out))
    return rows


def stacked_li_report(original: ImagePlane, processed: ImagePlane, spec: StepEdgeSpec,
                      dog: DoGParams = DoGParams()) -> tuple[HaloReport, HaloReport]:
    """Halo reports of the perceived original and perceived processed image."""
    if original.shape != processed.shape:
        raise DimensionMismatchError(f"original {original.shape} vs processed {processed.shape}")
    return (measure_halo(perceived_luminance(original, dog), spec),
            measure_halo(perceived_luminance(processed, dog), spec))
