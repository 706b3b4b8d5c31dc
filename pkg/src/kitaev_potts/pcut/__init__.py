from .coefficients import CoeffTable, pcut_coefficients
from .operators import LARGE, SMALL, TOperatorSpec, decompose_T

__all__ = ["CoeffTable", "pcut_coefficients", "LARGE", "SMALL", "TOperatorSpec", "decompose_T"]
