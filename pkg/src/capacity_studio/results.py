"""Common result type returned by every identification method."""

from dataclasses import dataclass, field

from .capacity import Capacity, capacity_to_dict
from .indices import IndexReport, index_report
from .qp import KKTResiduals


@dataclass(frozen=True)
class IdentificationResult:
    """A fitted capacity plus everything needed to audit the fit.

    fit_error is the root residual E on the training data (0.0 when the
    method interpolates or no data was given, None when the method has no
    data term at all). kkt and active_constraints are present only for
    the optimization-based methods. diagnostics carries method-specific
    extras such as the Sugeno lambda or an underdetermined flag.
    """

    method: str
    capacity: Capacity
    status: str
    fit_error: float | None = None
    objective: float | None = None
    kkt: KKTResiduals | None = None
    active_constraints: tuple[str, ...] = ()
    indices: IndexReport | None = None
    diagnostics: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.fit_error is not None and self.fit_error < 0.0:
            raise ValueError("fit error must be nonnegative")
        if self.indices is None:
            object.__setattr__(self, "indices", index_report(self.capacity))

    def to_dict(self) -> dict:
        out = {
            "method": self.method,
            "status": self.status,
            "capacity": capacity_to_dict(self.capacity),
            "fit_error": self.fit_error,
            "objective": self.objective,
            "kkt": None if self.kkt is None else self.kkt.to_dict(),
            "active_constraints": list(self.active_constraints),
            "indices": self.indices.to_dict(),
            "diagnostics": dict(self.diagnostics),
        }
        return out
