"""Exception hierarchy shared by all simulator modules."""


class TrLinkError(Exception):
    """Base class for every error raised by this package."""


class ConfigurationError(TrLinkError, ValueError):
    """Inconsistent setup: mismatched sample rates, bad scheme, invalid scenario."""


class DomainError(TrLinkError, ValueError):
    """Input outside an operation's domain: empty signal, zero-energy channel, ..."""
