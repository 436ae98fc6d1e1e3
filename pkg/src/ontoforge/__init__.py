"""ontoforge: domain ontologies from text document collections."""

__version__ = "0.1.0"
