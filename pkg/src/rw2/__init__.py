"""Rewriting 2-theories: critical spans, coherence certificates, tilings and Thompson-group arithmetic."""

__version__ = "0.1.0"
