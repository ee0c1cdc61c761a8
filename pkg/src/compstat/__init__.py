"""Statistical tests, association measures and classification built on compressor code lengths."""

__version__ = "0.1.0"
