"""Exception types shared across the simulator."""


class DomainError(ValueError):
    """An operation was called outside its domain (empty pool, bad qname, ...)."""


class ConfigError(DomainError):
    """A scenario configuration file is missing or malformed."""

    def __init__(self, message: str, key: str | None = None) -> None:
        self.key = key
        super().__init__(f"{key}: {message}" if key else message)
