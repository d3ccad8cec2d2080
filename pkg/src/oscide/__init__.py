"""Design and verification toolkit for cross-coupled LC VCOs.

Closed-form start-up, frequency, tank-capacitance and phase-noise equations
for the conventional and cascode cross-coupled pairs, checked against a
small-signal nodal solver and a nonlinear transient simulator.
"""

__version__ = "0.1.0"
