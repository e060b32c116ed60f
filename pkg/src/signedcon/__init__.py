"""Analysis and simulation of first-order agents on signed digraphs with leader groups."""

__version__ = "0.1.0"
