"""Useful constant values.

These are the defaults used throughout the library.  Functions accept
explicit keyword arguments so the values here are only consulted when
the caller does not care.

"""

import math

DEFAULT_ABS_TOL = 1e-12
"""Absolute tolerance for quadrature"""

DEFAULT_REL_TOL = 1e-10
"""Relative tolerance for quadrature"""

DEFAULT_MAX_SUBDIVISIONS = 60
"""Maximum number of adaptive bisections (or refinement levels)"""

DEFAULT_MAX_NODES = 1 << 17
"""Maximum number of integrand evaluations in a single quadrature"""

SERIES_TOLERANCE = 1e-16
"""Series are truncated when |term / partial sum| drops below this"""

SERIES_MAX_TERMS = 500
"""Series that have not converged after this many terms fail"""

HELD_OUT_SLACK = 0.05
"""Relative slack allowed for held-out samples when verifying bounds"""

MIN_GRID_CELLS = 16
"""Smallest radial grid accepted by the partial-wave solver"""

MODE_TOLERANCE = 1e-10
"""Relative size of the neglected partial-wave tail"""

FREE_DIAGONAL_MASSLESS = 1.0 / (2.0 * math.pi)
"""Value of t**2 times the free massless kernel on the diagonal"""

SLOPE_TOLERANCE = 0.1
"""Allowed deviation of a fitted decay exponent from its prediction"""
