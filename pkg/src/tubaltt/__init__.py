"""Tubal tensor train (TTT) decomposition and t-product algebra."""

from .completion import CompletionProblem, TsvdBackend, TttBackend, complete
from .errors import (
    FormatError,
    InfeasibleRankError,
    MaskError,
    NumericFailureError,
    ResidualImaginaryError,
    ShapeMismatchError,
    ToleranceNotMetError,
    TubalError,
)
from .metrics import MetricReport, ergas, metric_report, mse_psnr, rmse, sam, ssim, ssim_mean, uiqi
from .tatcu import allocate_budgets, synchronize_ranks, tatcu
from .tensor_core import (
    fft_tube,
    frobenius_norm,
    frontal_slice,
    ifft_tube,
    relative_error,
    reshape,
)
from .tprod import (
    identity_tensor,
    is_f_diagonal,
    is_orthogonal,
    is_partially_orthogonal,
    tprod_fast,
    tprod_reference,
    ttranspose,
    tubal_outer_product,
)
from .tsvd import TsvdFactors, tsvd_reconstruct, tsvd_tolerance, tsvd_truncated
from .tt import TtFormat, atcu, tt_contract, tt_svd
from .ttt import TttFormat, ttt_contract, ttt_param_count, ttt_svd, ttt_svd_tolerance, ttt_tube

__version__ = "0.1.0"
