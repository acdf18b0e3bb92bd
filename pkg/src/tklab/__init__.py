"""Discrete approximation of the heat semigroup on bounded continuous functions,
measured in local sup seminorms."""

__version__ = "0.1.0"
