"""Secure list decoding toolkit: channels, information measures, capacity
regions, binding scores, list codes and bit-string commitment."""
__version__ = "0.1.0"
