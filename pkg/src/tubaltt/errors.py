"""Exception hierarchy shared by all modules.

The CLI maps these onto exit codes, so every error raised on purpose by the
library derives from :class:`TubalError`.
"""


class TubalError(Exception):
    """Base class for library errors."""


class ShapeMismatchError(TubalError, ValueError):
    """Operand shapes are incompatible."""


class InfeasibleRankError(TubalError, ValueError):
    """Requested rank profile cannot be realized for the given shape."""


class ResidualImaginaryError(TubalError, ArithmeticError):
    """An inverse FFT that should be real carries a non-negligible imaginary part."""

    def __init__(self, max_imag, max_real):
        self.max_imag = float(max_imag)
        self.max_real = float(max_real)
        super().__init__(
            f"residual imaginary part {self.max_imag:.3e} "
            f"(max real part {self.max_real:.3e}); conjugate symmetry is broken"
        )


class NumericFailureError(TubalError, ArithmeticError):
    """A numerical kernel (SVD, QR) failed to converge."""


class ToleranceNotMetError(TubalError):
    """An error-driven method could not reach its tolerance.

    ``best_error`` holds the smallest relative error that was achieved.
    """

    def __init__(self, tol, best_error, result=None):
        self.tol = float(tol)
        self.best_error = float(best_error)
        self.result = result
        super().__init__(
            f"tolerance {self.tol:g} not met; best relative error {self.best_error:.6g}"
        )


class MaskError(TubalError, ValueError):
    """Observation mask is not binary or does not match the data."""


class FormatError(TubalError, ValueError):
    """A file is malformed. ``offset`` is the byte position where parsing failed."""

    def __init__(self, message, offset=None):
        self.offset = offset
        if offset is not None:
            message = f"{message} (at byte offset {offset})"
        super().__init__(message)
