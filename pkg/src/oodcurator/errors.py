"""Exception hierarchy; each family maps to one CLI exit status."""


class CurationError(Exception):
    exit_code = 1


class ConfigError(CurationError):
    exit_code = 2


class UnknownKeyError(ConfigError):
    def __init__(self, key: str, where: str = "config"):
        self.key = key
        super().__init__(f"unknown key {key!r} in {where}")


class MissingKeyError(ConfigError):
    def __init__(self, key: str, where: str = "config"):
        self.key = key
        super().__init__(f"missing required key {key!r} in {where}")


class InvariantViolationError(ConfigError):
    pass


class IncompatibleCombinationError(ConfigError):
    pass


class SourceError(CurationError):
    exit_code = 3


class MissingFileError(SourceError):
    pass


class MalformedSchemaError(SourceError):
    def __init__(self, missing: str, where: str):
        self.missing = missing
        super().__init__(f"{where} is missing {missing!r}")


class InvalidSpecError(CurationError):
    exit_code = 2


class EmptyDatasetError(CurationError):
    exit_code = 4


class MissingDomainFieldError(CurationError):
    pass


class DatasetExistsError(CurationError):
    pass


class DatasetInvariantError(CurationError):
    exit_code = 5
