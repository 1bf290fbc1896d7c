"""Daily global solar radiation forecasting toolkit."""

__version__ = "0.1.0"
