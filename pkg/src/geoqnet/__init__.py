"""Geographic quantum-network simulation: fiber topology, photonic links,
network statistics and entanglement-swapping repetition rates."""

__version__ = "0.1.0"
