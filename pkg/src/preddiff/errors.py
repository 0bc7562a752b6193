"""Exception hierarchy shared across the package."""


class PredDiffError(Exception):
    """Base class for all errors raised by this package."""


class SchemaError(PredDiffError):
    """Feature vectors, column indices or declared shapes do not line up."""


class ModelError(PredDiffError):
    """A prediction violated the model contract (shape, finiteness, simplex)."""


class ImputerError(PredDiffError):
    """An imputer was fitted or sampled outside its contract."""


class CostGuardError(PredDiffError):
    """A brute-force oracle was asked for more than its exponential budget."""


class BridgeError(PredDiffError):
    """The external-model bridge protocol was violated or the worker failed."""
