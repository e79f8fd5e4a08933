class AdapterError(Exception):
    """Base class for adapter failures."""


class ConfigError(AdapterError):
    """Configuration value out of range or inconsistent."""


class ModelLoadError(AdapterError):
    """A model checkpoint could not be located or loaded."""


class DecodeError(AdapterError):
    """The input video (frame directory) could not be decoded."""
