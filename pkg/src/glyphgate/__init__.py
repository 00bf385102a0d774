"""Glyph-positioning leak analysis for redacted PDFs."""
