"""Exception hierarchy shared by all modules."""


class OpenGCError(Exception):
    pass


class InputError(OpenGCError, ValueError):
    """Malformed input: unknown symbol, bad file, wrong constraint kind."""


class LifecycleError(OpenGCError, RuntimeError):
    """Operation not allowed in the session's current phase."""


class ResourceError(OpenGCError, RuntimeError):
    """A search or enumeration exceeded its budget.

    ``best_bound`` carries the best value known when the budget ran out,
    or None if nothing useful was found.
    """

    def __init__(self, message, best_bound=None):
        super().__init__(message)
        self.best_bound = best_bound
