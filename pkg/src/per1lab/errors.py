"""Exception types shared across the package.

Every domain failure raises a subclass of Per1Error carrying a short
machine-readable code (used by the CLI to emit structured error JSON).
"""


class Per1Error(Exception):
    code = "error"

    def payload(self):
        return {"code": self.code, "message": str(self)}


class DegenerateParameter(Per1Error):
    """a = +-sqrt(3): the two critical points coincide."""
    code = "degenerate-parameter"


class BudgetExceeded(Per1Error):
    code = "budget-exceeded"


class WindowTooLarge(Per1Error):
    code = "window-too-large"


class NotEscaping(Per1Error):
    code = "not-escaping"


class BranchAmbiguity(Per1Error):
    """An orbit factor left the principal-log safety disk before escape."""
    code = "branch-ambiguity"


class NotInHInfinity(Per1Error):
    code = "not-in-h-infinity"


class SeedEscapedQuadrant(Per1Error):
    code = "seed-escaped-quadrant"


class NotInBasin(Per1Error):
    code = "not-in-basin"


class InverseBranchLost(Per1Error):
    code = "inverse-branch-lost"


class NotApplicable(Per1Error):
    code = "not-applicable"


class SideUndecided(Per1Error):
    """Orbit point too close to the separating curve to pick a lift branch."""
    code = "side-undecided"


class OrbitBudget(Per1Error):
    code = "orbit-budget"


class NotAdjacent(Per1Error):
    code = "not-adjacent"


class WrongDepth(Per1Error):
    code = "wrong-depth"


class RayHitsCriticalValue(Per1Error):
    code = "ray-hits-critical-value"


class RayCrash(Per1Error):
    code = "ray-crash"

    def __init__(self, message, depth=None, angle=None):
        super().__init__(message)
        self.depth = depth
        self.angle = angle


class ObstructedInternalRay(Per1Error):
    code = "obstructed-internal-ray"


class ArrangementDegenerate(Per1Error):
    code = "arrangement-degenerate"


class NotALandingVertex(Per1Error):
    code = "not-a-landing-vertex"


class MissingComponentData(Per1Error):
    code = "missing-component-data"


class ContinuationStalled(Per1Error):
    code = "continuation-stalled"

    def __init__(self, message, last_point=None):
        super().__init__(message)
        self.last_point = last_point


class ConfigError(Per1Error):
    code = "config-error"
