"""Fake-news classification on LIAR / LIAR-Plus with speaker credit scores."""

__version__ = "0.1.0"
