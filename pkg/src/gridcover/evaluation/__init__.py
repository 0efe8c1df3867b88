"""Evaluation harness — trial fan-out, aggregation, experiment sweeps."""
