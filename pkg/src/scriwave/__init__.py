"""Numerics for polyhomogeneous asymptotics of wave equations near spacelike infinity."""

__version__ = "0.1.0"
