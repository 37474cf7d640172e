"""
holopatch
=========

Point-cloud holography for phase-only SLMs: patch-based synthesis
(NP), a Gerchberg-Saxton baseline, a scalar wave simulator
and the metrics used to compare them.
"""

__version__ = "0.1.1"
