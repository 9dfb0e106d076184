"""Spatial weighting W over the local patch and the local mean it induces.

Two kernels are supported: a normalized (2r+1)^2 box and a Gaussian
approximated by three successive box passes. Borders replicate the edge
pixel. Both filters cost O(1) per pixel regardless of the kernel size.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Literal

import numpy as np

from haloslhe import _kernels
from haloslhe.errors import ParameterError
from haloslhe.imaging import ImagePlane


def three_box_radii(sigma_s: float, passes: int = 3) -> tuple[int, ...]:
    """Box radii whose cascade approximates a Gaussian of std ``sigma_s``.

    Standard ideal-width rule: pick odd widths ``wl`` and ``wl + 2`` around
    ``sqrt(12 sigma^2 / n + 1)`` and use as many of the smaller box as keeps
    the summed variance closest to ``sigma_s**2``.
    """
    ideal = math.sqrt(12.0 * sigma_s * sigma_s / passes + 1.0)
    wl = int(math.floor(ideal))
    if wl % 2 == 0:
        wl -= 1
    wl = max(wl, 1)
    wu = wl + 2
    m = (12.0 * sigma_s * sigma_s - passes * wl * wl - 4 * passes * wl - 3 * passes) / (-4.0 * wl - 4.0)
    m = min(max(int(math.floor(m + 0.5)), 0), passes)
    widths = [wl] * m + [wu] * (passes - m)
    return tuple((w - 1) // 2 for w in widths)


@dataclass(frozen=True)
class SpatialKernel:
    """Weighting function W; its support is the local patch.

    ``kind="box"`` uses ``radius``; ``kind="gauss3box"`` uses ``sigma_s``.
    """

    kind: Literal["box", "gauss3box"] = "box"
    radius: int = 32
    sigma_s: float = 0.0

    def __post_init__(self):
        if self.kind == "box":
            if int(self.radius) != self.radius or self.radius < 1:
                raise ParameterError(f"box radius must be an integer >= 1, got {self.radius}")
        elif self.kind == "gauss3box":
            if not self.sigma_s > 0:
                raise ParameterError(f"sigma_s must be > 0, got {self.sigma_s}")
        else:
            raise ParameterError(f"unknown kernel kind {self.kind!r}")

    @classmethod
    def box(cls, radius: int) -> "SpatialKernel":
        return cls("box", radius=radius)

    @classmethod
    def gauss(cls, sigma_s: float) -> "SpatialKernel":
        return cls("gauss3box", sigma_s=float(sigma_s))

    @property
    def pass_radii(self) -> tuple[int, ...]:
        if self.kind == "box":
            return (self.radius,)
        return three_box_radii(self.sigma_s)

    @property
    def support_radius(self) -> int:
        return sum(self.pass_radii)

    def weights_1d(self) -> np.ndarray:
        """Separable 1-D weights over ``[-support, support]``, summing to 1."""
        w = np.ones(1)
        for r in self.pass_radii:
            w = np.convolve(w, np.full(2 * r + 1, 1.0 / (2 * r + 1)))
        # enforce exact mirror symmetry
        return 0.5 * (w + w[::-1])

    def weights_2d(self) -> np.ndarray:
        w = self.weights_1d()
        return np.outer(w, w)

    def apply(self, values: np.ndarray) -> np.ndarray:
        """Filter a raw 2-D float array with this kernel."""
        if self.kind == "box":
            return _box(values, self.radius)
        return _cascade(values, self.pass_radii)


def _box(a: np.ndarray, radius: int) -> np.ndarray:
    a = np.ascontiguousarray(a, dtype=np.float64)
    # offsetting by the minimum keeps constant regions exact
    ref = a.min()
    s = _kernels.box_sum_cols(_kernels.box_sum_rows(a - ref, radius), radius)
    w = 2 * radius + 1
    return ref + s / (w * w)


def _cascade(a: np.ndarray, radii) -> np.ndarray:
    # pad once by the total support so the cascade equals one convolution
    # with the composite kernel under a replicate border
    a = np.asarray(a, dtype=np.float64)
    ref = a.min()
    pad = sum(radii)
    work = np.pad(a - ref, pad, mode="edge")
    for r in radii:
        if r == 0:
            continue
        w = 2 * r + 1
        work = _kernels.box_sum_cols(_kernels.box_sum_rows(work, r), r) / (w * w)
    h, w = a.shape
    return ref + work[pad:pad + h, pad:pad + w]


def box_filter(plane: ImagePlane, radius: int) -> ImagePlane:
    """Mean over the (2r+1)x(2r+1) window via separable running sums."""
    if int(radius) != radius or radius < 1:
        raise ParameterError(f"radius must be an integer >= 1, got {radius}")
    return ImagePlane(_clip_unit(_box(plane.samples, int(radius))))


def gauss3box_filter(plane: ImagePlane, sigma_s: float) -> ImagePlane:
    """Gaussian blur approximated by three box passes."""
    if not sigma_s > 0:
        raise ParameterError(f"sigma_s must be > 0, got {sigma_s}")
    return ImagePlane(_clip_unit(_cascade(plane.samples, three_box_radii(sigma_s))))


def _clip_unit(a: np.ndarray) -> np.ndarray:
    # running sums can stray past the range by a few ulps
    return np.clip(a, 0.0, 1.0)


@dataclass(eq=False)
class LocalMeanField:
    plane: ImagePlane

    @property
    def samples(self) -> np.ndarray:
        return self.plane.samples


def local_mean(plane: ImagePlane, kernel: SpatialKernel) -> LocalMeanField:
    """Kernel-weighted mean of each pixel's local patch."""
    if kernel.kind == "box":
        return LocalMeanField(box_filter(plane, kernel.radius))
    return LocalMeanField(gauss3box_filter(plane, kernel.sigma_s))
