"""Noncommutative polynomial derivatives, their matrix spectra and covering numbers."""

from importlib.metadata import PackageNotFoundError, version as _version

try:
    __version__ = _version("artifact")
except PackageNotFoundError:  # running from a source tree
    __version__ = "0.1.0"

from .ncpoly import Letter, Polynomial, PolyTuple, parse, parse_tuple  # noqa: E402
from .derivation import TensorElement, TensorMatrix, d_s, d_sa, d_u, partial_deriv  # noqa: E402
from .repn import MatrixTuple, assemble, real_derivative, sample  # noqa: E402
from .spectral import fkl_det, nullity_rank, svd_measure  # noqa: E402

__all__ = [
    "Letter", "Polynomial", "PolyTuple", "parse", "parse_tuple", "TensorElement",
    "TensorMatrix", "d_s", "d_sa", "d_u", "partial_deriv", "MatrixTuple", "assemble",
    "real_derivative", "sample", "fkl_det", "nullity_rank", "svd_measure", "__version__",
]
