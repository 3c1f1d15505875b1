"""Forecasting which accounts will be flagged as suspicious from day-level login traces."""

__version__ = "0.1.0"
