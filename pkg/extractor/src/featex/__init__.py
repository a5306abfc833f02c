from .fmx import write_fmx
from .models import BACKBONES, build
from .pipeline import ExtractorSpec, extract

__version__ = "0.1.0"

__all__ = ["BACKBONES", "ExtractorSpec", "build", "extract", "write_fmx"]
