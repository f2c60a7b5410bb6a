"""Context-tree universal learning for radar waveform selection."""

__version__ = "0.1.0"
