"""Prototype-driven exploration and representation pretraining for pixel RL."""

__version__ = "0.1.0"
