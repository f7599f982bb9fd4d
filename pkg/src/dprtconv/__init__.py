"""Exact 2D convolution through the Discrete Periodic Radon Transform,
separable low-rank convolution, and an architecture cost model."""
from .convolution import (
    ConvRequest,
    circconv1d,
    circconv2d_direct,
    circconv2d_dprt,
    convolve,
    dprt_pipeline,
    linconv2d,
    linconv2d_direct,
    overlap_add,
)
from .core import (
    BitBudget,
    DprtConvError,
    ImageBlock,
    Kernel,
    bit_budget,
    mod_pos,
    next_prime,
)
from .dprt import DprtArray, dprt_forward, dprt_inverse, dprt_sum, zero_pad
from .lowrank import (
    SeparableDecomposition,
    decompose,
    linconv1d,
    lu_separate,
    quantize_filters,
    rankconv2d,
    svd_truncate,
)

__version__ = "0.1.0"
