#!/usr/bin/env python3
"""
Projection Lab
Numerical laboratory for dimension lower bounds of non-degenerate families of
orthogonal projections onto m-planes.
"""


__version__ = "1.0.0"
__author__ = "Projection Lab Team"
__license__ = "MIT"
__description__ = "Dimension of projected measures under k-parameter projection families"
