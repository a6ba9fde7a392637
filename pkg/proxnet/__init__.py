"""
proxnet - prox-affine operator networks: certification, iteration and VI checks.
"""

__version__ = "0.1.0"
