"""mRMR-family feature selection with a synthetic benchmark and evaluation harness."""

__version__ = "0.1.0"
