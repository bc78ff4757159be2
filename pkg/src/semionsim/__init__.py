"""Semion-code simulator and decoder workbench on the hexagonal torus."""

from semionsim.lattice import CodeLattice, build_lattice

__all__ = ["CodeLattice", "build_lattice"]
__version__ = "0.1.0"
