"""Exception types raised across the toolkit.

Everything derives from GazeToolkitError so callers (and the CLI) can
distinguish input problems from genuine bugs.
"""


class GazeToolkitError(Exception):
    """Base class for all toolkit errors."""


# --- ingest ---------------------------------------------------------------

class MissingColumn(GazeToolkitError):
    def __init__(self, name):
        self.name = name
        super().__init__(f"column {name!r} not found in log header")


class MalformedRow(GazeToolkitError):
    def __init__(self, line_number, detail=""):
        self.line_number = line_number
        msg = f"malformed row at line {line_number}"
        if detail:
            msg += f": {detail}"
        super().__init__(msg)


class EmptyLog(GazeToolkitError):
    pass


class MalformedDocument(GazeToolkitError):
    pass


class UnknownCategory(GazeToolkitError):
    def __init__(self, category):
        self.category = category
        super().__init__(f"unknown category {category!r}")


class DegenerateBox(GazeToolkitError):
    pass


# --- saliency maps --------------------------------------------------------

class ImageTooSmall(GazeToolkitError):
    pass


# --- scanpath metrics -----------------------------------------------------

class EmptyScanpath(GazeToolkitError):
    pass


class ScanpathShorterThanK(GazeToolkitError):
    pass


class NoRecurrences(GazeToolkitError):
    pass


# --- saliency map metrics -------------------------------------------------

class DimensionMismatch(GazeToolkitError):
    pass


class EmptyFixations(GazeToolkitError):
    pass


class ZeroVariance(GazeToolkitError):
    pass


# --- statistics -----------------------------------------------------------

class ZeroExpected(GazeToolkitError):
    pass


class GroupTooSmall(GazeToolkitError):
    pass


class ZeroVariancePooled(GazeToolkitError):
    pass


# --- bias analyses --------------------------------------------------------

class KTooLarge(GazeToolkitError):
    pass


class NoData(GazeToolkitError):
    pass


# --- scanpath generation --------------------------------------------------

class AllZeroMap(GazeToolkitError):
    pass


class NFixZero(GazeToolkitError):
    pass
