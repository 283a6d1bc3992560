"""Joint request assignment and bandwidth allocation for serverless edge computing."""

__version__ = "0.1.0"
