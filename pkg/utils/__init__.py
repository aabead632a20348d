"""Numerical core: geometry, Heisenberg group, lemma, bounds and eigensolvers."""
