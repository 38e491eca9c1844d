"""Desk-scale workbench for force-aware action-chunking manipulation policies."""

__version__ = "0.1.0"
