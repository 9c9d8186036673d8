"""Domain exceptions shared across socialmuse."""
from typing import Optional


class NotFound(LookupError):
    """An ego, alter or concept id is not part of the structure it was looked up in."""


class DegenerateDistribution(UserWarning):
    """Follower counts are all zero, so shares are undefined."""


class MissingVocabulary(ValueError):
    """A document has no token covered by the embedding table."""


class InvalidInput(ValueError):
    pass


class NotReady(RuntimeError):
    """The recommender was asked for a decision without a trained model."""


class InvalidConfig(ValueError):
    pass


class SchemaError(ValueError):
    def __init__(self, message: str, path: Optional[str] = None, line_number: Optional[int] = None):
        self.path = path
        self.line_number = line_number
        where = ""
        if path is not None:
            where = f"{path}"
            if line_number is not None:
                where += f":{line_number}"
            where += ": "
        super().__init__(f"{where}{message}")
