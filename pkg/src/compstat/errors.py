"""Exception hierarchy with stable machine-readable codes (used by the CLI)."""


class CompstatError(Exception):
    code = "E_INTERNAL"


class DomainError(CompstatError, ValueError):
    """Input outside an operation's domain (empty sequence, alphabet mismatch, ...)."""

    code = "E_DOMAIN"


class BackendError(CompstatError, RuntimeError):
    """An external compressor process failed."""

    code = "E_BACKEND"

    def __init__(self, message, *, returncode=None, stderr=""):
        super().__init__(message)
        self.returncode = returncode
        self.stderr = stderr


class ResourceError(CompstatError):
    """An enumeration or table guard was exceeded."""

    code = "E_RESOURCE"


class UndefinedResultError(CompstatError, ArithmeticError):
    """A statistic is undefined for the given table (e.g. zero margin)."""

    code = "E_UNDEFINED"


class UsageError(CompstatError):
    code = "E_USAGE"


class InputError(CompstatError, OSError):
    code = "E_IO"
