"""Remote microwave entanglement via opto-electro-mechanical interfaces."""

__version__ = "1.0.0"
