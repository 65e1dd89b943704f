"""Folksonomy analytics and tag-based social link prediction."""
__version__ = "0.1.0"
