"""Secret-key rates for one-way QKD protocols with pre-processing."""

__version__ = "0.1.0"
