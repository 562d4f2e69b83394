"""Pseudoholomorphic disks with prescribed 1-jet and Kobayashi pseudonorm estimates."""

__version__ = "0.1.0"
