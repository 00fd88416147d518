"""contactlab: a numerical laboratory for zero-range quantum interactions.

Scaled two-body potential families with resonance tuning, half-line model
operators with Efimov-type spectra, Gross-Pitaevskii solvers (cubic and
shell-coupled), and resolvent-convergence diagnostics, driven by a
reproducible command-line experiment runner.
"""

__version__ = "0.1.0"
