"""Multimodal transaction investigation: sequence, graph, and narrative
embeddings fused for cosine-similarity retrieval, served to analysts."""

__version__ = "0.1.0"
