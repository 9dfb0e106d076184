"""Image containers, the 10-bit level scale, and binary PNM (P5/P6) I/O.

All arithmetic happens on float64 samples in [0, 1]. Level units
(0..1023) only appear at parameter boundaries: tonal widths, step-edge
levels and halo amplitudes are all quoted on that scale.
"""

from __future__ import annotations

import os
import tempfile
from dataclasses import dataclass
from pathlib import Path
from typing import Union

import numpy as np

from haloslhe.errors import (
    DimensionMismatchError,
    PnmDepthError,
    PnmDimensionError,
    PnmFormatError,
    PnmTruncationError,
)

# Rec.709 luma weights
LUMA_R = 0.2126
LUMA_G = 0.7152
LUMA_B = 0.0722


@dataclass(frozen=True)
class IntensityScale:
    """Affine map between unit-interval samples and integer level units."""

    level_count: int = 1024

    @property
    def max_level(self) -> int:
        return self.level_count - 1

    def to_levels(self, x):
        return np.multiply(x, self.max_level)

    def from_levels(self, levels):
        return np.divide(levels, self.max_level)


SCALE = IntensityScale()


def _as_samples(values, ndim: int) -> np.ndarray:
    arr = np.array(values, dtype=np.float64)
    if arr.ndim != ndim:
        raise DimensionMismatchError(f"expected a {ndim}-d array, got shape {arr.shape}")
    if arr.shape[0] < 1 or arr.shape[1] < 1:
        raise DimensionMismatchError(f"empty image of shape {arr.shape}")
    if not np.all(np.isfinite(arr)) or arr.min() < 0.0 or arr.max() > 1.0:
        raise ValueError("samples must lie in [0, 1]")
    return arr


@dataclass(eq=False)
class ImagePlane:
    """Single-channel luminance raster, ``samples[row, col]`` in [0, 1]."""

    samples: np.ndarray
    source_maxval: int | None = None

    def __post_init__(self):
        self.samples = _as_samples(self.samples, 2)

    @property
    def height(self) -> int:
        return self.samples.shape[0]

    @property
    def width(self) -> int:
        return self.samples.shape[1]

    @property
    def shape(self) -> tuple[int, int]:
        return self.samples.shape

    @classmethod
    def from_levels(cls, levels, scale: IntensityScale = SCALE) -> "ImagePlane":
        return cls(scale.from_levels(np.asarray(levels, dtype=np.float64)))

    def levels(self, scale: IntensityScale = SCALE) -> np.ndarray:
        return scale.to_levels(self.samples)


@dataclass(eq=False)
class ColorImage:
    """RGB raster, ``pixels[row, col, channel]`` in [0, 1]."""

    pixels: np.ndarray
    source_maxval: int = 255

    def __post_init__(self):
        self.pixels = _as_samples(self.pixels, 3)
        if self.pixels.shape[2] != 3:
            raise DimensionMismatchError("color images need exactly 3 channels")

    @property
    def height(self) -> int:
        return self.pixels.shape[0]

    @property
    def width(self) -> int:
        return self.pixels.shape[1]

    @property
    def shape(self) -> tuple[int, int]:
        return self.pixels.shape[:2]


Image = Union[ImagePlane, ColorImage]

_WHITESPACE = b" \t\r\n\v\f"


def _header_tokens(data: bytes, count: int) -> tuple[list[bytes], int]:
    """Read ``count`` whitespace-separated header tokens after the magic.

    Returns the tokens and the offset of the first raster byte (the single
    whitespace character after the last token is consumed).
    """
    tokens = []
    pos = 2
    n = len(data)
    while len(tokens) < count:
        while pos < n and data[pos] in _WHITESPACE:
            pos += 1
        if pos < n and data[pos] == ord("#"):
            while pos < n and data[pos] not in b"\r\n":
                pos += 1
            continue
        start = pos
        while pos < n and data[pos] not in _WHITESPACE and data[pos] != ord("#"):
            pos += 1
        if start == pos:
            raise PnmFormatError("truncated PNM header")
        tokens.append(data[start:pos])
    if pos >= n or data[pos] not in _WHITESPACE:
        # a zero-length raster may legitimately end right after the maxval
        if pos == n:
            return tokens, pos
        raise PnmFormatError("missing whitespace after PNM header")
    return tokens, pos + 1


def decode_pnm(data: bytes) -> Image:
    """Decode a binary PGM (P5) or PPM (P6) byte string.

    16-bit rasters are big-endian. Samples are ``raw / maxval``.
    """
    data = bytes(data)
    magic = data[:2]
    if magic not in (b"P5", b"P6"):
        raise PnmFormatError(f"unsupported magic {magic!r}")
    tokens, offset = _header_tokens(data, 3)
    try:
        width, height, maxval = (int(t) for t in tokens)
    except ValueError:
        raise PnmFormatError(f"non-numeric header field in {tokens!r}") from None
    if width <= 0 or height <= 0:
        raise PnmDimensionError(f"invalid dimensions {width}x{height}")
    if maxval not in (255, 65535):
        raise PnmDepthError(f"unsupported maxval {maxval}")

    channels = 1 if magic == b"P5" else 3
    dtype = np.dtype(">u2") if maxval == 65535 else np.dtype("u1")
    expected = width * height * channels * dtype.itemsize
    raster = data[offset:offset + expected]
    if len(raster) < expected:
        raise PnmTruncationError(f"raster has {len(raster)} bytes, expected {expected}")

    raw = np.frombuffer(raster, dtype=dtype).astype(np.float64)
    samples = raw / maxval
    if channels == 1:
        return ImagePlane(samples.reshape(height, width), source_maxval=maxval)
    return ColorImage(samples.reshape(height, width, 3), source_maxval=maxval)


def quantize(samples: np.ndarray, maxval: int) -> np.ndarray:
    """Round-half-up quantization of unit samples to ``0..maxval``."""
    q = np.floor(np.asarray(samples, dtype=np.float64) * maxval + 0.5)
    return np.clip(q, 0, maxval)


def encode_pnm(image: Image, maxval: int = 255) -> bytes:
    if maxval not in (255, 65535):
        raise PnmDepthError(f"unsupported maxval {maxval}")
    if isinstance(image, ColorImage):
        magic, values = b"P6", image.pixels
    else:
        magic, values = b"P5", image.samples
    dtype = ">u2" if maxval == 65535 else "u1"
    raster = quantize(values, maxval).astype(dtype).tobytes()
    header = b"%s\n%d %d\n%d\n" % (magic, image.width, image.height, maxval)
    return header + raster


def read_pnm(path) -> Image:
    return decode_pnm(Path(path).read_bytes())


def atomic_write_bytes(path, payload: bytes) -> None:
    """Write via a temporary file in the same directory, then rename."""
    path = Path(path)
    fd, tmp = tempfile.mkstemp(dir=path.parent or ".", prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(payload)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def write_pnm(path, image: Image, maxval: int | None = None) -> None:
    if maxval is None:
        maxval = image.source_maxval or 255
    atomic_write_bytes(path, encode_pnm(image, maxval))


def luminance_of(color: ColorImage) -> ImagePlane:
    """Rec.709 luminance.

    Evaluated as ``G + wr*(R-G) + wb*(B-G)`` (the weights sum to one), which
    returns the channel value exactly for gray pixels.
    """
    rgb = color.pixels
    r, g, b = rgb[..., 0], rgb[..., 1], rgb[..., 2]
    y = g + LUMA_R * (r - g) + LUMA_B * (b - g)
    return ImagePlane(np.clip(y, 0.0, 1.0), source_maxval=color.source_maxval)


def reattach_chroma(color: ColorImage, y_old: ImagePlane, y_new: ImagePlane,
                    saturation: float = 1.0) -> ColorImage:
    """Carry the colour of ``color`` over to a new luminance.

    Each channel becomes ``(channel / y_old) ** saturation * y_new``, so
    saturation 1 scales the pixel by the luminance ratio and saturation 0
    yields the gray value ``y_new``. Pixels whose old luminance is below one
    level are replaced by gray.
    """
    if not (color.shape == y_old.shape == y_new.shape):
        raise DimensionMismatchError(
            f"shapes differ: color {color.shape}, y_old {y_old.shape}, y_new {y_new.shape}")
    if not 0.0 <= saturation <= 1.0:
        raise ValueError("saturation must lie in [0, 1]")
    yo = y_old.samples[..., None]
    yn = y_new.samples[..., None]
    dark = yo < 1.0 / SCALE.max_level
    safe = np.where(dark, 1.0, yo)
    out = (color.pixels / safe) ** saturation * yn
    out = np.where(dark, yn, out)
    return ColorImage(np.clip(out, 0.0, 1.0), source_maxval=color.source_maxval)
