"""Explicit-state LTL model checking of swap protocol models."""

from ._swapmc import LoadError, Model, ResourceError, pretty_print, regression_suite, validate

__all__ = ["LoadError", "Model", "ResourceError", "pretty_print", "regression_suite", "validate"]
