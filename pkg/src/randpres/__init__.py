"""Non-backtracking random walks, Schreier rewriting and surjection estimates
for few-relator random group presentations."""

__version__ = "0.1.0"
