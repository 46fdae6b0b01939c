"""Exception types raised across hsdnet."""


class HsdnetError(Exception):
    """Base class for every error hsdnet raises on purpose."""


class ShapeMismatchError(HsdnetError, ValueError):
    """A tensor does not fit the layer or node it is fed to."""


class ContainerFormatError(HsdnetError, ValueError):
    """A container file is malformed (bad magic, version, truncation, wrong kind)."""


class NonFiniteError(HsdnetError, RuntimeError):
    """A loss or gradient became NaN or infinite."""


class TreeInvariantError(HsdnetError, ValueError):
    """Tree construction produced children that break the class partition rules."""


class MissingArtifactError(HsdnetError, FileNotFoundError):
    """A pipeline stage ran before the stage that produces its input."""


class DatasetFormatError(HsdnetError, ValueError):
    """A dataset file does not follow its binary layout."""


class MissingIscvError(HsdnetError, ValueError):
    """Decomposition needs impact scores for a layer that were not computed."""
