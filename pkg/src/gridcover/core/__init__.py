"""Core shared kernel — models, config, utilities."""
