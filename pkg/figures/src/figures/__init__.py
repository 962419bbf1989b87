"""Renderers for the simulator CLI's CSV outputs.

This package only reads the CSV/JSON files; it never imports the simulator.
"""

__version__ = "0.1.0"
