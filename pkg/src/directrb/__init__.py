"""Direct randomized benchmarking: circuit generation, simulation, fitting and theory."""

__version__ = "0.1.0"
