"""Exception hierarchy shared by the library, the CLI and the API."""
from typing import Optional


class TweetInfoError(Exception):
    """Base class for every error raised on purpose by tweetinfo."""


class DataError(TweetInfoError, ValueError):
    """Input data is malformed, mislabeled, empty or too small."""

    def __init__(self, message: str, *, line: Optional[int] = None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class ConfigError(TweetInfoError, ValueError):
    """Invalid experiment configuration or hyperparameters."""


class ConvergenceError(TweetInfoError, ArithmeticError):
    """An objective or loss became non-finite."""

    def __init__(
        self,
        message: str,
        *,
        iteration: Optional[int] = None,
        batch: Optional[int] = None,
    ):
        if iteration is not None:
            message = f"{message} (iteration {iteration})"
        if batch is not None:
            message = f"{message} (batch {batch})"
        super().__init__(message)
        self.iteration = iteration
        self.batch = batch


class ArtifactError(TweetInfoError, ValueError):
    """A saved model or vocabulary file cannot be read back."""
