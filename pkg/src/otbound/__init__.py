"""Generalization bounds from local Lipschitz regularity and optimal transport."""
