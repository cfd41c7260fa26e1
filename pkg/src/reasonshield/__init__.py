"""Reason-based moral shielding for tabular RL in the bridge gridworld."""

__version__ = "0.1.0"
