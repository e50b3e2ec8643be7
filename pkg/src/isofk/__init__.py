"""Random-cluster model on isoradial rectangular lattices."""

__version__ = "0.1.0"
