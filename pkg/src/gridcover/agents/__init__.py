"""Coverage policies: EMAC, the IQL / IAC learners, and the NRL planner."""
