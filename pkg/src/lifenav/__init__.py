"""Deterministic lifelong-navigation simulation workbench.

Grid-world scenes, a discrete-action agent with visibility-based
observation, frontier exploration with epsilon-greedy subgoal selection,
deterministic shortest-path planning, exact visual-token compression
arithmetic, image-centric memory with context-budget accounting, SR/SPL
evaluation, and seeded episode dataset generation.
"""

__version__ = "0.1.0"
