"""Parse, lint, graph and convert TEI dictionary etymologies."""

__version__ = "0.1.0"
