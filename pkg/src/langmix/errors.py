"""Exception types shared across the toolkit."""


class LangmixError(Exception):
    """Base class for all toolkit errors."""


class NoValidTokens(LangmixError):
    """Response (or every sentence in it) contains no valid tokens."""


class EmptyInput(LangmixError):
    """An aggregate was requested over an empty collection."""


class ShapeMismatch(LangmixError):
    """Prompt/repeat structure of a response set is incomplete or duplicated."""


class NonFiniteLoss(LangmixError):
    """A loss value is NaN, infinite, or negative."""


class DegenerateProbability(LangmixError):
    """Sequence probability is 0 or >= 1, so odds are undefined."""


class MissingReference(LangmixError):
    """DPO needs reference log-probabilities that the record does not carry."""


class LexiconMiss(LangmixError):
    """Too few words of the input have substitution-lexicon entries."""


class InputDataError(LangmixError):
    """An input file is malformed or violates its schema."""


class EndpointUnreachable(LangmixError):
    """The generation endpoint could not be reached after retries."""


class MalformedResponse(LangmixError):
    """The generation endpoint answered with an unusable body."""


class ConfigError(LangmixError):
    """Bad configuration file or option combination."""
