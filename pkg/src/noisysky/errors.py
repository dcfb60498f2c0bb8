class ContractViolation(ValueError):
    """Raised when a caller breaks an operation's preconditions."""
