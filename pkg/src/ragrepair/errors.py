"""Exception taxonomy shared across the package."""


class RagRepairError(Exception):
    """Base class for every error raised by this package."""


class ConfigError(RagRepairError):
    """A configuration value or combination of values is invalid."""


class InputError(RagRepairError):
    """A caller-supplied input violates the operation's precondition."""


class ContractError(RagRepairError):
    """Internal data disagrees with a declared contract (e.g. dim mismatch)."""


class TransportError(RagRepairError):
    """A remote call failed after the configured number of retries."""


class ToolchainError(RagRepairError):
    """A required external executable is missing or unusable."""


class CompileTimeoutError(RagRepairError):
    """The compiler did not finish within the configured timeout."""

    def __init__(self, message: str, partial_output: str = ""):
        super().__init__(message)
        self.partial_output = partial_output


class IndexFormatError(RagRepairError):
    """A persisted index file does not have the expected format."""


class CorruptIndexError(IndexFormatError):
    """A persisted index file fails its integrity checks."""


class CorpusError(RagRepairError):
    """The documentation corpus cannot be ingested."""


class ScriptExhaustedError(RagRepairError):
    """The scripted generation provider has no reply for a requested key."""


class CaseValidationError(RagRepairError):
    """A benchmark case directory violates the case schema."""
