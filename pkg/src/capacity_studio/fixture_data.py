"""Access to the packaged worked-example data files."""

from importlib import resources

FIXTURE_NAMES = (
    "table2-alternatives.json",
    "table3-parameters.json",
    "table4-concepts.json",
    "table5-capacity.json",
    "table6-singletons.json",
    "table6-capacity.json",
    "table7-preferences.json",
    "table12-constraints.json",
    "interval-scores.json",
    "learning-samples.json",
)


def fixture_path(name: str) -> str:
    """Filesystem path of a packaged fixture by file name."""
    if name not in FIXTURE_NAMES:
        raise KeyError(f"unknown fixture {name!r}; see FIXTURE_NAMES")
    return str(resources.files("capacity_studio").joinpath("fixtures", name))
