"""Random-walk couplings, harmonic cocycles and diagonal-product constructions
on wreath products and other locally-finite-by-Z groups."""

__version__ = "0.1.0"
