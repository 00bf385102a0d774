import os
from pathlib import Path

_PACKAGE_DATA = Path(__file__).resolve().parent / "data"


def data_dirs():
    """Directories searched for shipped data, in priority order.

    ``GLYPHGATE_DATA`` (an ``os.pathsep`` separated list) takes precedence
    over the data bundled with the package.
    """
    dirs = []
    env = os.environ.get("GLYPHGATE_DATA")
    if env:
        dirs.extend(Path(p) for p in env.split(os.pathsep) if p)
    dirs.append(_PACKAGE_DATA)
    return dirs


def find_data(*parts):
    for base in data_dirs():
        candidate = base.joinpath(*parts)
        if candidate.exists():
            return candidate
    raise FileNotFoundError("/".join(parts))
