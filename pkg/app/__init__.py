"""HybridZX: diagramas de cuerdas híbridos cuántico-clásicos."""

__version__ = "0.1.0"
