"""Exception hierarchy. The CLI maps every ``TrendwatchError`` to exit status 1."""


class TrendwatchError(Exception):
    """Base class for data errors raised by the library."""


class MalformedRecord(TrendwatchError):
    def __init__(self, line: int, reason: str = ""):
        self.line = line
        self.reason = reason
        msg = f"malformed record at line {line}"
        super().__init__(f"{msg}: {reason}" if reason else msg)


class InvalidTimestamp(TrendwatchError):
    def __init__(self, value, line: int | None = None):
        self.value = value
        self.line = line
        where = f" at line {line}" if line is not None else ""
        super().__init__(f"invalid timestamp {value!r}{where}")


class IntegrityError(TrendwatchError):
    """A corpus violates a referential or structural invariant."""


class MissingProfile(IntegrityError):
    def __init__(self, user_id: str):
        self.user_id = user_id
        super().__init__(f"no profile for user {user_id!r}")


class EmptyInput(TrendwatchError):
    pass


class EmptyCorpus(TrendwatchError):
    pass


class TooFewSamples(TrendwatchError):
    pass


class DegenerateData(TrendwatchError):
    pass


class DimensionMismatch(TrendwatchError):
    pass


class LengthMismatch(TrendwatchError):
    pass


class SchemaError(TrendwatchError):
    """Persisted artifact has the wrong kind or schema version."""


class InsufficientClassData(TrendwatchError):
    def __init__(self, category):
        self.category = category
        name = getattr(category, "value", category)
        super().__init__(f"not enough positive examples for category {name}")


class InsufficientTweets(TrendwatchError):
    def __init__(self, count: int, minimum: int = 100):
        self.count = count
        self.minimum = minimum
        super().__init__(f"{count} tweets, need at least {minimum}")


class MissingLanguageSlice(TrendwatchError):
    def __init__(self, language: str):
        self.language = language
        super().__init__(f"no tweets in language {language!r}")
