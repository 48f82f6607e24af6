"""Locally refined discrete-velocity grids and a steady BGK solver."""
