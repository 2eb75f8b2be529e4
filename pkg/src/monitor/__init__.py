"""MONITOR: multimodal veracity assessment of social-media posts."""

__version__ = "0.1.0"
