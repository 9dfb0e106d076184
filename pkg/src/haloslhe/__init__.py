"""Halo-controlled smoothed local histogram equalization.

Tone mapping by locally equalizing luminance with a Gaussian-smoothed
histogram whose tonal width varies per pixel: pixels darker than their
local mean get a wider tonal kernel, which flattens dark halos around
strong edges while leaving light-side behaviour untouched.
"""

from haloslhe.errors import (
    ConfigError,
    DimensionMismatchError,
    ParameterError,
    PnmError,
    SlheError,
)
from haloslhe.imaging import (
    SCALE,
    ColorImage,
    ImagePlane,
    IntensityScale,
    decode_pnm,
    encode_pnm,
    luminance_of,
    read_pnm,
    reattach_chroma,
    write_pnm,
)
from haloslhe.localstats import (
    LocalMeanField,
    SpatialKernel,
    box_filter,
    gauss3box_filter,
    local_mean,
)
from haloslhe.sigma import (
    SigmaField,
    SigmaParams,
    build_sigma_field,
    classify_group,
    sigma_at,
)
from haloslhe.engine import (
    EqualizerConfig,
    equalize_binned,
    equalize_reference,
    tonal_cdf,
    tone_map,
)
from haloslhe.hvs import (
    DoGParams,
    HaloReport,
    StepEdgeSpec,
    make_step_edge,
    measure_halo,
    perceived_luminance,
    sigma_sweep,
    stacked_li_report,
)

__version__ = "0.1.0"
