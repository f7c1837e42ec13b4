"""Deterministic swarm-sensing simulator: synthetic-aperture anomaly imaging,
RX detection, blob confidence objective, modified particle swarm controller,
experiment harness, and a live operator bridge."""

__version__ = "0.1.0"
