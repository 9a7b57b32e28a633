"""Interpreters, fragment classifiers and translators for LDSR and LARS_D."""

__version__ = "0.1.0"
