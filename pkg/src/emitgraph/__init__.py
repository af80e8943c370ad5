"""Simulation and synthesis of emitter-based photonic graph-state circuits."""
