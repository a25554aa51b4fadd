"""Quantum metric geometry on finite-dimensional spectral triples (partial build)."""
