"""Sentence-embedding sidecar: serves vectors over HTTP and exports
answer-bank embedding files in the engine's JSON-lines format."""

__version__ = "0.1.0"
