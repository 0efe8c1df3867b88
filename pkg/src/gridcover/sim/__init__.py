"""Gridworld simulator — terrain, transitions, rewards, disturbances."""
