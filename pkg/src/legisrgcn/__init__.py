"""Representation learning for legislators, bills, and speeches.

The package covers the full pipeline: parsing congressional-record daily
editions into speeches, loading a JSONL corpus, encoding long documents,
building a multi-relational heterogeneous graph, training a relational
graph convolutional network with task heads, and evaluating against
baselines and analyses.
"""

__version__ = "0.1.0"
