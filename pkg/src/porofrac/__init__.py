"""Phase-field fracture of porous elastic-plastic solids under fluid injection."""

__version__ = "0.1.0"
