"""Shared exception types."""


class CapacityStructureError(ValueError):
    """Capacity data is structurally unusable (bad keys, missing
    coefficients, values outside [0, 1]). Distinct from axiom violations,
    which validation reports as data."""


class ConsistencyError(ValueError):
    """A lattice construction contradicts its own boundary condition."""


class NumericError(RuntimeError):
    """A numerical routine failed to converge or to bracket a root."""


class CycleError(ValueError):
    """Strict preference relations contain a cycle."""


class InfeasibleError(ValueError):
    """The constraint system admits no feasible capacity.

    Carries a structured report naming the most-violated constraints at the
    least-infeasible point found.
    """

    def __init__(self, report: "InfeasibilityReport"):
        self.report = report
        super().__init__(str(report))


class InfeasibilityReport:
    """Most-violated constraint labels with their violations.

    suggested_relaxation, when present, lists user-stated constraints
    whose removal (found greedily, worst offender first) restores
    feasibility."""

    def __init__(
        self,
        max_violation: float,
        worst: list[tuple[str, float]],
        suggested_relaxation: list[str] | None = None,
    ):
        self.max_violation = max_violation
        self.worst = worst
        self.suggested_relaxation = suggested_relaxation

    def to_dict(self) -> dict:
        out = {
            "max_violation": self.max_violation,
            "worst_constraints": [
                {"constraint": label, "violation": gap}
                for label, gap in self.worst
            ],
        }
        if self.suggested_relaxation is not None:
            out["suggested_relaxation"] = list(self.suggested_relaxation)
        return out

    def __str__(self) -> str:
        rows = ", ".join(f"{label} (by {gap:.3g})" for label, gap in self.worst)
        text = (
            f"infeasible constraint set, max violation "
            f"{self.max_violation:.3g}: {rows}"
        )
        if self.suggested_relaxation:
            text += "; feasible after dropping " + ", ".join(
                self.suggested_relaxation
            )
        return text
