"""Ultracold particles in symmetric double wells, from single-particle spectra to the adiabatic SWAP gate."""

__version__ = "0.1.0"
