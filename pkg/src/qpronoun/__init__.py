"""Pronoun resolution with compositional parameterised quantum circuits."""

__version__ = "0.1.0"
