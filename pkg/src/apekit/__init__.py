"""Corpus engineering and evaluation toolkit for automatic post-editing."""

__version__ = "0.1.0"
