"""Bundled fixtures: the worked 6 x 7 example table and its basis matrix."""

from importlib import resources

from ..io import load_json, table_from_dict


def fixture_path(name: str):
    return resources.files(__name__).joinpath(name)


def example_table(mode: str | None = None):
    """The 6 x 7 rank-3 example table (exact by default)."""
    with resources.as_file(fixture_path("example_table.json")) as path:
        return table_from_dict(load_json(path), mode)
