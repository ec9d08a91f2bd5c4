"""Synthetic sources, the red-green baseline and Monte Carlo experiment drivers."""
