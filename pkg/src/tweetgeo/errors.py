"""Exception types shared across the package."""


class DataError(ValueError):
    """Bad input data: malformed files, schema violations, inconsistent tables."""


class BundleError(DataError):
    """Model bundle file is unreadable: bad magic, wrong version, truncation."""
