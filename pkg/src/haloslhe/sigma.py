"""Per-pixel tonal width from the light/dark luminance-group rule.

A pixel at or above its local mean belongs to the light group and gets the
small width ``sigma_min``. A pixel below the mean belongs to the dark group
and its width grows linearly with its relative depth below the mean,
reaching ``sigma_max`` for a black pixel::

    sigma_dark = (sigma_max - sigma_min) * (mean - p) / mean + sigma_min

The ``swapped`` policy applies the same rule to the intensity-reflected
image, so the light group receives the enlarged widths instead.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Literal

import numpy as np

from haloslhe.errors import DimensionMismatchError, ParameterError
from haloslhe.imaging import SCALE, ImagePlane
from haloslhe.localstats import LocalMeanField

LIGHT = "light"
DARK = "dark"

DEFAULT_SIGMA_MIN = 64.0
DEFAULT_SIGMA_MAX = 256.0


@dataclass(frozen=True)
class SigmaParams:
    sigma_min: float = DEFAULT_SIGMA_MIN
    sigma_max: float = DEFAULT_SIGMA_MAX
    group_policy: Literal["paper", "swapped"] = "paper"

    def __post_init__(self):
        if not 0 < self.sigma_min <= self.sigma_max <= SCALE.max_level:
            raise ParameterError(
                f"need 0 < sigma_min <= sigma_max <= {SCALE.max_level}, "
                f"got sigma_min={self.sigma_min}, sigma_max={self.sigma_max}")
        if self.group_policy not in ("paper", "swapped"):
            raise ParameterError(f"unknown group policy {self.group_policy!r}")


@dataclass(eq=False)
class SigmaField:
    """Tonal width per pixel, in level units."""

    values: np.ndarray

    @property
    def shape(self) -> tuple[int, int]:
        return self.values.shape

    @classmethod
    def uniform(cls, shape, sigma: float) -> "SigmaField":
        return cls(np.full(shape, float(sigma)))


def classify_group(p_in: float, l_mean: float) -> str:
    """Light iff the pixel is at or above its local mean."""
    return LIGHT if p_in >= l_mean else DARK


def _paper_sigma(p, m, lo, hi):
    dark = p < m
    # dark pixels have m > p >= 0, so the division is safe where it is used
    depth = np.where(dark, (m - p) / np.where(dark, m, 1.0), 0.0)
    return np.where(dark, (hi - lo) * depth + lo, lo)


def _sigma_array(p, m, params: SigmaParams) -> np.ndarray:
    p = np.asarray(p, dtype=np.float64)
    m = np.asarray(m, dtype=np.float64)
    if params.group_policy == "swapped":
        p, m = 1.0 - p, 1.0 - m
    return _paper_sigma(p, m, float(params.sigma_min), float(params.sigma_max))


def sigma_at(p_in: float, l_mean: float, params: SigmaParams) -> float:
    """Tonal width (level units) for one pixel and its local mean (unit samples)."""
    return float(_sigma_array(p_in, l_mean, params))


def build_sigma_field(plane: ImagePlane, mean: LocalMeanField, params: SigmaParams) -> SigmaField:
    if plane.shape != mean.samples.shape:
        raise DimensionMismatchError(f"plane {plane.shape} vs mean {mean.samples.shape}")
    return SigmaField(_sigma_array(plane.samples, mean.samples, params))
