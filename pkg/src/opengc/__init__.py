"""Open global constraints: contractibility, prefix closures, open propagation
and soft violation measures."""

from .errors import InputError, LifecycleError, OpenGCError, ResourceError

__version__ = "0.1.0"

__all__ = ["InputError", "LifecycleError", "OpenGCError", "ResourceError", "__version__"]
