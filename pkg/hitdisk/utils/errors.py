# errors.py
# Exception hierarchy shared by the library and the command line


class HitDiskError(Exception):
    """Base class for every error raised by hitdisk"""

    exit_code = 1


class ParameterError(HitDiskError, ValueError):
    """Invalid record or command-line parameter"""

    exit_code = 2


class ConfigurationError(HitDiskError):
    """Configuration file or environment could not be used"""

    exit_code = 2


class DomainError(HitDiskError, ValueError):
    """A point or coordinate lies outside the domain of an operation"""

    exit_code = 3


class VerificationFailure(HitDiskError):
    """One or more verification checks failed"""

    exit_code = 1

    def __init__(self, failed_checks):
        self.failed_checks = list(failed_checks)
        super().__init__("verification failed: " + ", ".join(self.failed_checks))
