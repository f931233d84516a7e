"""IRS-assisted multi-UAV downlink simulator with DDPG/PPO resource allocation."""

__version__ = "0.1.0"
