"""Hybrid dense+keyword search over scientific-paper corpora.

The package covers the full retrieve-then-rank flow: corpus loading and
paragraph splitting, inverted and dense indexes, score fusion, answer- and
summary-based rank modulation, TREC-style evaluation, and a CLI plus HTTP
service on top.
"""

__version__ = "0.1.0"

__all__ = ["__version__"]
