"""Benchmark harness for SQL-generating models: classify, execute, score, repair."""

__version__ = "0.1.0"
