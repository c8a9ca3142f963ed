"""Deterministic QoS integration-test simulator for LEO satellite edge clusters."""

__version__ = "0.1.0"
