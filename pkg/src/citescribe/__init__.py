"""Scholarly writing engine: contextual citation suggestion and staged
introduction drafting, with offline evaluation harnesses for both."""

__version__ = "0.1.0"
