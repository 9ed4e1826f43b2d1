"""Span-based internal parametricity: cube category, kernel, presheaf model,
translations, surface language and CLI."""

__version__ = "0.1.0"
