"""Exception types shared across the package."""


class MoltaskError(Exception):
    """Base class for all package-specific errors."""


# ---------------------------------------------------------------------------
# SMILES parsing

class ParseError(MoltaskError):
    """A SMILES string could not be turned into a molecular graph.

    Every instance carries a ``category`` out of {grammar, unclosed-ring,
    unclosed-branch, valence, aromaticity}; the evaluation layer treats any
    category as "invalid design".
    """

    category = "grammar"

    def __init__(self, message, position=None):
        self.position = position
        if position is not None:
            message = f"{message} (at position {position})"
        super().__init__(message)


class GrammarError(ParseError):
    category = "grammar"


class UnknownCharacter(GrammarError):
    """A character outside the SMILES grammar subset."""

    def __init__(self, char, position):
        self.char = char
        super().__init__(f"unknown character {char!r}", position)


class UnclosedRingError(ParseError):
    category = "unclosed-ring"


class UnclosedBranchError(ParseError):
    category = "unclosed-branch"


class ValenceError(ParseError):
    category = "valence"


class AromaticityError(ParseError):
    category = "aromaticity"


# ---------------------------------------------------------------------------
# Vocabulary / token sequences

class OutOfVocabulary(MoltaskError):
    def __init__(self, token):
        self.token = token
        super().__init__(f"token {token!r} is not in the vocabulary")


class SequenceTooLong(MoltaskError):
    def __init__(self, length, limit):
        self.length = length
        self.limit = limit
        super().__init__(f"sequence of {length} ids exceeds the limit of {limit}")


# ---------------------------------------------------------------------------
# Descriptors

class UnclassifiedAtomEnvironment(MoltaskError):
    """An atom environment missing from a contribution table.

    Callers treat the whole molecule as unscorable rather than defaulting the
    contribution to zero.
    """

    def __init__(self, atom_index, element, detail=""):
        self.atom_index = atom_index
        self.element = element
        msg = f"no table entry for atom {atom_index} ({element})"
        if detail:
            msg += f": {detail}"
        super().__init__(msg)


# ---------------------------------------------------------------------------
# Weight-space arithmetic

class LayoutMismatch(MoltaskError):
    """Two flattened weight vectors do not share a layout."""


# ---------------------------------------------------------------------------
# Statistics / fingerprints

class EmptySample(MoltaskError):
    pass


class WidthMismatch(MoltaskError):
    pass


# ---------------------------------------------------------------------------
# Training

class InsufficientData(MoltaskError):
    def __init__(self, side, needed, available):
        self.side = side
        self.needed = needed
        self.available = available
        super().__init__(
            f"not enough {side} molecules: need {needed}, have {available}"
        )


class NonFiniteLoss(MoltaskError):
    def __init__(self, epoch, value):
        self.epoch = epoch
        self.value = value
        super().__init__(f"loss became non-finite at epoch {epoch}: {value}")


# ---------------------------------------------------------------------------
# CLI / experiment harness

class ConfigError(MoltaskError):
    """Invalid experiment configuration (CLI exit code 2)."""


class MissingArtifact(MoltaskError):
    """A required input file is absent (CLI exit code 3)."""

    def __init__(self, path, hint=""):
        self.path = str(path)
        self.hint = hint
        msg = f"missing artifact: {path}"
        if hint:
            msg += f" ({hint})"
        super().__init__(msg)
