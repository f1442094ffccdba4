"""Coded-bit importance for polar SC decoding and permutation mapping over unequal channels."""

__version__ = "0.1.0"
