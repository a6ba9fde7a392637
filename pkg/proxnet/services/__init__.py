"""Numerical services: activations, networks, certificates, iteration and VI checks."""
