"""Sub-pixel motion compensation: interpolation filters, block warping and MAC accounting."""

__version__ = "0.1.0"

from .complexity import ComplexityReport, c_1d, c_2d, c_2d_block, reconcile, table2_grid
from .errors import ConfigurationError, ContractError
from .filter_bank import (
    Filter,
    FilterKind,
    FilterSpec,
    FilterTable,
    build_filter_table,
    derive_polynomial_filter,
    derive_sinc_filter,
)
from .frameio import QualityResult, RawVideoSpec, psnr, read_yuv, synth_bandlimited, write_yuv
from .motion import (
    MotionField,
    MotionVector,
    QuantSpec,
    expand_to_dense,
    quantize_field,
    quantize_fraction,
    read_mvf,
    split_displacement,
    write_mvf,
)
from .warp import (
    Frame,
    MacCounter,
    WarpConfig,
    interp_1d,
    predict_bidir,
    warp_block,
    warp_brute_force,
    warp_dense,
)
