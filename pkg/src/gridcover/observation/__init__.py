"""Per-agent partial observations and belief coverage maps."""
