"""herdlens_adapter: perception-model export front end for herdlens."""

from .config import AdapterConfig
from .errors import AdapterError, ConfigError, DecodeError, ModelLoadError
from .export import export_imagery, export_video
from .models import CheckpointBackend, SyntheticBackend, load_backend

__version__ = "0.1.0"

__all__ = [
    "AdapterConfig",
    "AdapterError", "ConfigError", "DecodeError", "ModelLoadError",
    "export_video", "export_imagery",
    "CheckpointBackend", "SyntheticBackend", "load_backend",
    "__version__",
]
