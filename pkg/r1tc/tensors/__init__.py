"""Partial tensor models and file formats."""
