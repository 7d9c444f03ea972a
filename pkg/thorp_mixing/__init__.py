"""Thorp shuffle, its time reversal, and exact mixing analysis on small decks."""
from thorp_mixing.constants import VERSION

__version__ = VERSION
