"""Threat-model-driven security assertion generation for RTL designs."""

__version__ = "0.1.0"
