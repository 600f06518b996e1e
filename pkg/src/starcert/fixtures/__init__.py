"""Bundled example inputs (scenarios, references, state specs)."""

from importlib import resources


def fixture_path(name: str):
    """Filesystem path of a bundled fixture file."""
    return resources.files(__package__) / name
