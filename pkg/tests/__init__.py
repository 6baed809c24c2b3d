"""
HRC Test Suite

Unit tests for the problem core, simulation, BSDE, HJB and CLI layers, plus
the desk-scale acceptance scenario under ``tests/simulations``.
"""
