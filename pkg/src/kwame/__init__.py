"""Bilingual course question answering: ingest lesson paragraphs, index them
per language, and answer student questions by cosine similarity."""

__version__ = "0.1.0"
