"""Weekly stock-movement classification benchmarked against random traders."""

__version__ = "0.1.0"
