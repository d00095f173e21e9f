"""Predicting whether, at what threshold, and when state policies become national policy."""
__version__ = "0.1.0"
