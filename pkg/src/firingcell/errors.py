class ConfigError(ValueError):
    """Invalid model or scenario configuration.

    ``path`` names the offending configuration key when known.
    """

    def __init__(self, reason: str, path: str | None = None):
        self.reason = reason
        self.path = path
        super().__init__(f"{path}: {reason}" if path else reason)


class KernelTruncationWarning(UserWarning):
    """A PSP kernel has not decayed by the end of its register."""
