"""auctionlp: exact solver and verifier for optimal multi-item,
multi-buyer auctions on finite type spaces.

Everything runs in exact rational arithmetic: the package builds the
revenue-maximization linear programs for dominant-strategy and Bayesian
implementations, solves them with a certified zero duality gap,
regularizes optimal dual solutions into virtual-value functions, and
checks the structural characterizations (virtual welfare maximization,
agent independence, revenue equalities) mechanically.
"""

__version__ = "0.1.0"
