"""Exception hierarchy shared by all locdict modules."""


class LocdictError(Exception):
    """Base class for every error raised by this package."""


class DataError(LocdictError):
    """Invalid input data (shape, labels, finiteness, file contents)."""


class ConfigError(LocdictError):
    """Invalid hyperparameter or flag combination."""


class NumericalError(LocdictError):
    """A linear-algebra step failed beyond recoverable stabilization."""


# -- data validation ----------------------------------------------------------

class EmptyClass(DataError):
    def __init__(self, label: int):
        self.label = label
        super().__init__(f"class {label} has no samples")


class LengthMismatch(DataError):
    pass


class NonFiniteEntry(DataError):
    def __init__(self, row: int, col: int):
        self.row, self.col = row, col
        super().__init__(f"non-finite entry at ({row}, {col})")


class ClassOutOfRange(DataError):
    pass


class DimensionMismatch(DataError):
    pass


class EmptyInput(DataError):
    pass


class InsufficientClassSamples(DataError):
    def __init__(self, label: int):
        self.label = label
        super().__init__(f"class {label} has too few samples for the requested split")


# -- graph construction -------------------------------------------------------

class KTooLarge(ConfigError):
    pass


class NonPositiveDelta(ConfigError):
    pass


class AsymmetricInput(DataError):
    pass


class NegativeSimilarity(DataError):
    pass


# -- numerical failures -------------------------------------------------------

class SingularSystem(NumericalError):
    pass


class SingularGram(NumericalError):
    pass


class DegenerateAtom(NumericalError):
    def __init__(self, atom: int):
        self.atom = atom
        super().__init__(f"atom {atom} collapsed to zero norm")


class TargetTooLarge(ConfigError):
    pass


# -- file I/O -----------------------------------------------------------------

class ParseError(DataError):
    def __init__(self, line: int, message: str = ""):
        self.line = line
        super().__init__(f"parse error at line {line}: {message}")


class DimensionInconsistent(DataError):
    def __init__(self, line: int):
        self.line = line
        super().__init__(f"inconsistent row length at line {line}")


class ModelVersionError(DataError):
    pass
