class ExtractorError(Exception):
    """Base class for extraction failures."""


class UnsupportedModel(ExtractorError):
    """The requested model id is not in the registry."""


class InvalidJob(ExtractorError):
    """An extraction job fails its preconditions (bad variant, unreadable image)."""


class InferenceFailure(ExtractorError):
    """The encoder backend could not produce embeddings."""
