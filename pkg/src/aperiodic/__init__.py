"""Aperiodic order toolkit: model sets, diffraction, local equivalence, substitutions, random tilings."""

__version__ = "0.1.0"
