"""Exception types shared across the package.

Every error raised on a violated caller contract derives from
PreconditionFailure so the CLI can map it to exit code 1 uniformly.
"""


class FinehullError(Exception):
    """Base class for all package errors."""

    kind = "error"

    def __init__(self, message, field=None):
        super().__init__(message)
        self.field = field

    def payload(self):
        out = {"error": self.kind, "message": str(self)}
        if self.field is not None:
            out["field"] = self.field
        return out


class PreconditionFailure(FinehullError):
    kind = "precondition_failure"


class GapOverflow(PreconditionFailure):
    kind = "gap_overflow"


class PlacementFailure(PreconditionFailure):
    kind = "placement_failure"


class PoleHit(PreconditionFailure):
    kind = "pole_hit"


class RegionViolatesEN(PreconditionFailure):
    kind = "region_violates_en"


class NotInEN(PreconditionFailure):
    kind = "not_in_en"


class NoConvergence(PreconditionFailure):
    kind = "no_convergence"


class DomainViolation(PreconditionFailure):
    kind = "domain_violation"


class BranchAtCut(PreconditionFailure):
    kind = "branch_at_cut"


class QuadratureFailure(PreconditionFailure):
    kind = "quadrature_failure"


class UnsupportedShape(PreconditionFailure):
    kind = "unsupported_shape"


class BoundVacuous(PreconditionFailure):
    kind = "bound_vacuous"


class DegenerateSet(PreconditionFailure):
    kind = "degenerate_set"


class EmptySample(PreconditionFailure):
    kind = "empty_sample"


class NoValidWeights(PreconditionFailure):
    kind = "no_valid_weights"


class ChainNotClosed(PreconditionFailure):
    kind = "chain_not_closed"
