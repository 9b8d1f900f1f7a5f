"""Exception types raised by the toolkit."""


class NpovmError(Exception):
    """Base class for all toolkit errors."""


class DimensionMismatch(NpovmError):
    """Operands act on spaces of different dimension."""


class NotHermitian(NpovmError):
    """Input matrix is further from Hermitian than the tolerance allows."""


class InvalidState(NpovmError):
    """Matrix fails the density-matrix invariants (PSD, unit trace)."""


class InvalidMeasurement(NpovmError):
    """Effects do not sum to the identity, or the family is empty."""


class InvalidSuperMap(NpovmError):
    """Action matrix is malformed or disagrees with its builtin tag."""


class InvalidDecomposition(NpovmError):
    """A summand matrix is not PSD or the induced effects do not sum to 1."""


class NegativeProbability(NpovmError):
    """State lies outside the quantum domain of the measurement."""


class AnchorOutsideSubspace(NpovmError):
    """The maximally mixed state does not lie in the sampling subspace."""


class RejectionBudgetExceeded(NpovmError):
    """PSD rejection sampling failed even after shrinking the jitter."""


class AllShotsRejected(NpovmError):
    """Every simulated shot hit the reject outcome (or there were none)."""


class AllOutcomesRejected(NpovmError):
    """A sampled domain state gives zero total mass to the kept outcomes."""


class DegenerateDecomposition(NpovmError):
    """All summands are zero, so no normalization constant exists."""


class InvalidDiagonalStructure(NpovmError):
    """An effect has a negative or an all-zero diagonal in the chosen basis,
    contradicting the domain conditions required by the pipeline."""


class CompensatorInfeasible(NpovmError):
    """No traceless compensator makes the diagonal-plus-direction summand PSD."""


class InversionConditionError(NpovmError):
    """The reject effect is not constant on the requested domain, so the
    post-selected statistics cannot be reproduced by a single measurement."""


class DegenerateC0(NpovmError):
    """c0 <= 1 means the reject outcome carries no mass; post-selection is
    trivial and the inversion formula is singular."""


class NearSingularFamily(NpovmError):
    """Pure-state family is too close to linearly dependent to invert."""


class OperatorInequalityViolated(NpovmError):
    """The weighted dual projectors exceed the identity."""


class SingularMultiplicityBlock(NpovmError):
    """A multiplicity matrix of the group representation is not invertible."""
