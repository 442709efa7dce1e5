"""Core test package."""
