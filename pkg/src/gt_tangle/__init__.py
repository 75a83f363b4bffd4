"""Exact truncated computations for GT actions on tangles and the Kontsevich invariant.

Modules: coeffring (coefficients), freeseries (noncommutative series),
diagrams (chord diagrams), assoc (associators, GT and GRT), tangles (ABC
words), kont (evaluation, actions, twistors, gamma0) and cli.
"""

__version__ = "0.1.0"
