"""Z3 Kitaev-Potts model: exact mapping, PCUT series, extrapolation, mean field and GME."""

__version__ = "0.1.0"

from .series import RationalSeries, load_reference_series  # noqa: E402

__all__ = ["RationalSeries", "load_reference_series", "__version__"]
