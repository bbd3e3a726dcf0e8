"""Deterministic MANET simulator: most-reliable-path routing from mobility
plans, position reports, and social-tie tables, plus a flooding link-state
baseline and a Monte-Carlo experiment harness."""

__version__ = "0.1.0"
