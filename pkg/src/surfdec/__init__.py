"""Convolutional neural-network syndrome decoding for surface codes, with HDRG mop-up."""

__version__ = "0.1.0"
