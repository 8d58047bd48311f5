"""Small bundled scenes and score tables used by the examples and tests."""

from importlib.resources import files


def bundled_path(*parts: str):
    """Filesystem path of a bundled data file."""
    return files(__name__).joinpath(*parts)
