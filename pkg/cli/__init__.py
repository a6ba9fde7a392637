"""
proxnet CLI - command line interface for prox-affine networks
"""

__version__ = "0.1.0"
