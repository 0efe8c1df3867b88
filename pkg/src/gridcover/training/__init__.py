"""Training loops for the learned coverage policies (EMAC, IQL, IAC)."""
