"""
Constants for the lab
"""
from enum import Enum


class Unbounded(str, Enum):
    """Sentinel values returned in place of an error"""
    NOT_WITHIN_LIMIT = "not_within_limit"
    INFINITY = "infinity"


NOT_WITHIN_LIMIT = Unbounded.NOT_WITHIN_LIMIT
INFINITY = Unbounded.INFINITY

# Group symbols
IDENTITY_SYMBOL = "e"
INVERSE_MARK = "'"
# 'e' is reserved for the identity
FREE_SYMBOLS = "abcdfghijklmnpqrstuvwxyz"

# Probability checks
PROBABILITY_SUM_TOLERANCE = 1e-12
MEASURE_SUM_TOLERANCE = 1e-9
DEGENERATE_ROW_MASS = 1e-12

# Statistics
SIGMA_MULTIPLIER = 3.0
DIVISION_STABILITY_FACTOR = 10.0

# Linear solves
RESIDUAL_TARGET = 1e-10

# Non-tangential verdicts
SATURATION_RATIO = 0.01
CONVERGENCE_RATIO = 0.02
VERDICT_WINDOW = 3

# Stabilization depth: d(o,x) + ceil(c) + 8*delta + 4
STABILIZATION_MARGIN = 4

# Default CSV headers
BALL_CSV_HEADER = ("word", "distance", "parent")
TUBE_CSV_HEADER = ("word", "distance_to_o", "verdict")
FUNCTION_CSV_HEADER = ("word", "value")
