"""Exception hierarchy shared across the package.

Every error carries a short machine-readable category used by the CLI to
map failures to exit codes and to the single-line diagnostic format
``error: <category>: <detail>``.
"""


class SdotError(Exception):
    category = "error"


class FormatError(SdotError):
    """Malformed input file (carries file/line context in the message)."""

    category = "parse"


class ValidationError(SdotError):
    """Input violates a documented invariant (bad density, imbalance, ...)."""

    category = "validation"


class InitializationError(ValidationError):
    """The Voronoi start produces empty cells for the listed sites."""

    def __init__(self, empty_sites):
        self.empty_sites = list(empty_sites)
        super().__init__(
            "empty initial Voronoi cell for site(s) "
            + ", ".join(str(i) for i in self.empty_sites)
        )


class SolverError(SdotError):
    category = "solver"


class DisconnectedAdjacencyError(SolverError):
    """The cell adjacency graph splits into several components."""

    def __init__(self, components):
        self.components = [sorted(c) for c in components]
        super().__init__(
            "cell adjacency graph is disconnected; components: "
            + "; ".join("{" + ", ".join(map(str, c)) + "}" for c in self.components)
        )


class LinearSolveError(SolverError):
    """The inner SPD solve missed its relative-residual contract."""


class LineSearchError(SolverError):
    """No damped step satisfied the acceptance rule within the halving cap."""
