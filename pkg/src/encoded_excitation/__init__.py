"""Two-level atom excitation by uncoded and spectrally phase-encoded single photons."""

__version__ = "0.1.0"
