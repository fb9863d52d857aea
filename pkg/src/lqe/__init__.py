"""Machine-learning link quality classification for wireless sensor links."""
from importlib.resources import files

__version__ = "0.1.0"


def fixture_path():
    """Directory of the bundled three-trace raw fixture."""
    return files(__name__) / "data" / "rutgers_fixture"
