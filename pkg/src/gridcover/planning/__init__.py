"""Full-knowledge coverage planning: Voronoi regions, BFS routing, boundary graph, spiral."""
