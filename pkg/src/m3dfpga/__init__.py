"""Analytical modeling and design-space exploration for monolithic-3D FPGA tiles."""

__version__ = "0.1.0"
