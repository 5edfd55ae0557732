"""Exact and Monte Carlo checks of the r-cGA drift machinery."""
