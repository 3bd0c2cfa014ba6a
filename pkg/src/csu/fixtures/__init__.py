"""Grammar files shipped with the package."""

from importlib import resources

NAMES = ("worked", "tree", "ambiguous")


def path(name: str):
    """Filesystem path of the fixture ``name`` (without the ``.cfg`` suffix)."""
    return resources.files(__name__).joinpath(f"{name}.cfg")


def load(name: str):
    from ..grammar import parse_grammar

    return parse_grammar(path(name).read_text(encoding="utf-8"))
