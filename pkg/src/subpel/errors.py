"""Exception types shared across the package."""


class ConfigurationError(ValueError):
    """An unsupported parameter combination (filter kind, taps, delta...)."""


class ContractError(ValueError):
    """Inputs violate an operation's preconditions (shape mismatch, bad range)."""
