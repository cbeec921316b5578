"""metriforge: aggregation functions for quasi-pseudometrics."""

__version__ = "0.1.0"
