import numpy as np

class McrArdError(Exception):
    """
    Base class for every error raised by the package.
    """
    pass

class NotSPD(McrArdError, np.linalg.LinAlgError):
    """
    The Cholesky factorization met a non-positive (or negligible) pivot.
    """
    pass

class DimensionMismatch(McrArdError, ValueError):
    pass

class EmptyDataset(McrArdError, ValueError):
    pass

class SeriesTooShort(McrArdError, ValueError):
    pass

class AllFeaturesPruned(McrArdError):
    """
    Every relevance parameter crossed the pruning threshold; no active feature
    is left to fit.
    """
    pass

class NonPositiveBandwidth(McrArdError, ValueError):
    pass

class BadGrid(McrArdError, ValueError):
    pass

class UndefinedCorrelation(McrArdError, ValueError):
    """
    One of the two vectors has zero variance.
    """
    pass

class EmptyRelevantSet(McrArdError, ValueError):
    pass

class AllZeroWeights(McrArdError, ValueError):
    pass

class KTooLarge(McrArdError, ValueError):
    pass

class FeatureMismatch(McrArdError, ValueError):
    """
    Columns of an input file do not match the columns a model was fit on.
    """
    def __init__(self, message, missing=(), unexpected=()):
        super().__init__(message)
        self.missing = list(missing)
        self.unexpected = list(unexpected)

class InputFormatError(McrArdError, ValueError):
    """
    Malformed input file. `line` and `column` point at the offending cell when
    they are known (1-based, header is line 1).
    """
    def __init__(self, message, path=None, line=None, column=None):
        location = ""
        if path is not None:
            location = f"{path}"
            if line is not None:
                location += f":{line}"
                if column is not None:
                    location += f":{column}"
            location += ": "
        super().__init__(location + message)
        self.path = path
        self.line = line
        self.column = column
