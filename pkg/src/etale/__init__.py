"""Finite restriction categories, étale partite categories and the
internalisation/externalisation adjunction between them."""

__version__ = "0.1.0"
