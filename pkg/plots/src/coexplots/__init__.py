"""Empirical CDF figures from uavcoex campaign sample CSVs."""

__version__ = "0.1.0"

from .cdf import FigureSpec, curve_quantiles, ecdf, load_samples, plot_cdf, select_series

__all__ = ["FigureSpec", "curve_quantiles", "ecdf", "load_samples",
           "plot_cdf", "select_series", "__version__"]
