"""curvlab: warped-product curvature tensors, frame minimization of
intermediate curvature, exact-rational inequality sweeps, and diameter
bounds, with a reproducible CLI front end."""

__version__ = "0.1.0"
