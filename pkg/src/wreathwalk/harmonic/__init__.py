"""Harmonic functions and cocycles on Schreier graphs and wreath products."""
