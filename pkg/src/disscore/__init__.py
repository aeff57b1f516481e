"""Reference-free MT evaluation centred on discourse connectives."""

__version__ = "0.1.0"
