"""Exception hierarchy.

Each exception carries a short remediation hint that the command line surfaces
verbatim.
"""


class BulkEdgeError(Exception):
    hint = ""

    def __init__(self, message: str, hint: str | None = None):
        super().__init__(message)
        if hint is not None:
            self.hint = hint


class NotLagrangianError(BulkEdgeError, ValueError):
    hint = "check that the frame is isotropic and of full rank"


class NotUnitaryError(BulkEdgeError, ValueError):
    hint = "re-orthonormalize the input"


class SymplecticityError(BulkEdgeError):
    hint = "increase the number of integration steps"


class EnergyClassificationError(BulkEdgeError):
    hint = "perturb E away from the band edges"


class NonRegularError(BulkEdgeError):
    hint = "non-regular energy, perturb E"


class IndexInconsistencyError(BulkEdgeError):
    hint = "increase N, L or the t-grid resolution"


class IntegerEmissionError(BulkEdgeError):
    hint = "refine the sampling; the index did not round to an integer"


class DiscretizationError(BulkEdgeError, ValueError):
    hint = "increase N"


class TruncationError(BulkEdgeError):
    hint = "truncation not converged, increase K"


class ConfigError(BulkEdgeError, ValueError):
    hint = "fix the configuration file"
