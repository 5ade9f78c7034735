"""Beta wavelet networks: function approximation and acoustic-unit modeling."""

__version__ = "0.1.0"
