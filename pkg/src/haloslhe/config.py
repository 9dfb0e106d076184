"""Run configuration: flat ``key = value`` files overridden by CLI flags."""

from __future__ import annotations

from dataclasses import dataclass, fields, replace
from typing import Mapping

from haloslhe.engine import EqualizerConfig
from haloslhe.errors import ConfigError, ParameterError
from haloslhe.localstats import SpatialKernel
from haloslhe.sigma import SigmaParams


@dataclass(frozen=True)
class RunConfig:
    sigma_min: float = 64.0
    sigma_max: float = 256.0
    radius: int = 32
    kernel: str = "box"
    bins: int = 256
    lut_levels: int = 16
    engine: str = "binned"
    policy: str = "paper"
    alpha: float = 1.0
    saturation: float = 1.0

    def spatial_kernel(self) -> SpatialKernel:
        # for the Gaussian kernel, radius is its standard deviation in pixels
        if self.kernel == "gauss":
            return SpatialKernel.gauss(float(self.radius))
        return SpatialKernel.box(self.radius)

    def sigma_params(self) -> SigmaParams:
        return SigmaParams(self.sigma_min, self.sigma_max, self.policy)

    def equalizer(self) -> EqualizerConfig:
        return EqualizerConfig(self.engine, self.bins, self.lut_levels, self.alpha)


def _choice(*options):
    def convert(text):
        if text not in options:
            raise ValueError(f"expected one of {', '.join(options)}")
        return text
    return convert


def _int(text):
    return int(text, 10)


_CONVERTERS = {
    "sigma_min": float,
    "sigma_max": float,
    "radius": _int,
    "kernel": _choice("box", "gauss"),
    "bins": _int,
    "lut_levels": _int,
    "engine": _choice("reference", "binned"),
    "policy": _choice("paper", "swapped"),
    "alpha": float,
    "saturation": float,
}
assert set(_CONVERTERS) == {f.name for f in fields(RunConfig)}


def parse_config_text(text: str) -> dict[str, str]:
    values = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}", f"expected 'key = value', got {raw!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        values[key] = value
    return values


def _validate(cfg: RunConfig) -> None:
    if cfg.sigma_min <= 0:
        raise ConfigError("sigma_min", "must be > 0")
    if cfg.sigma_min > cfg.sigma_max:
        raise ConfigError("sigma_min/sigma_max",
                          f"sigma_min ({cfg.sigma_min:g}) exceeds sigma_max ({cfg.sigma_max:g})")
    if cfg.radius < 1:
        raise ConfigError("radius", "must be >= 1")
    if cfg.bins < 16:
        raise ConfigError("bins", "must be >= 16")
    if cfg.lut_levels < 2:
        raise ConfigError("lut_levels", "must be >= 2")
    for key in ("alpha", "saturation"):
        if not 0.0 <= getattr(cfg, key) <= 1.0:
            raise ConfigError(key, "must lie in [0, 1]")
    try:
        cfg.sigma_params()
    except ParameterError as exc:
        raise ConfigError("sigma_max", str(exc)) from None


def parse_config(file_text: str = "", flag_overrides: Mapping[str, object] | None = None) -> RunConfig:
    """Merge defaults, file values and flag overrides (highest precedence)."""
    raw = parse_config_text(file_text)
    raw.update({k: v for k, v in (flag_overrides or {}).items() if v is not None})
    values = {}
    for key, value in raw.items():
        if key not in _CONVERTERS:
            raise ConfigError(key, "unknown key")
        try:
            values[key] = _CONVERTERS[key](str(value).strip())
        except ValueError as exc:
            raise ConfigError(key, f"cannot parse {value!r}: {exc}") from None
    cfg = replace(RunConfig(), **values)
    _validate(cfg)
    return cfg
