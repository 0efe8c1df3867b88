"""Dense-network kernel — forward, analytic backward, policy head, Adam."""
