"""Extended test package."""
