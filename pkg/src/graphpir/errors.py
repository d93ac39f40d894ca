"""Exception hierarchy shared across the package.

The CLI maps these onto exit codes: precondition violations exit 2,
guarantee violations exit 3, parse/IO problems exit 4.
"""


class GraphPirError(Exception):
    """Base class for all package errors."""


class PreconditionError(GraphPirError):
    """A documented precondition of an operation does not hold (exit 2)."""


class GuaranteeViolation(GraphPirError):
    """A protocol guarantee (correctness, privacy, security) failed (exit 3)."""


class FormatError(GraphPirError):
    """Malformed input document; ``path`` points at the offending field (exit 4)."""

    def __init__(self, path, message):
        self.path = path
        super().__init__(f"{path}: {message}")


# -- field ------------------------------------------------------------------

class FieldMismatch(GraphPirError):
    """Operands belong to different prime fields."""


class ZeroInverse(GraphPirError):
    """Multiplicative inverse of zero requested."""


class Singular(GraphPirError):
    """Matrix inversion attempted on a rank-deficient matrix."""


# -- storage patterns -------------------------------------------------------

class EmptyReplication(PreconditionError):
    """A message set is stored on no server."""


class DuplicateServer(PreconditionError):
    """A replication tuple lists the same server twice."""


class ServerOutOfRange(PreconditionError):
    """A replication tuple references a server outside [1..N]."""


class MessageLost(PreconditionError):
    """Restricting to a server subset dropped every replica of a message set."""


# -- scheme / capacity preconditions ---------------------------------------

class DegenerateCapacity(PreconditionError):
    """rho_min <= X + T: no interference-free dimension remains."""


class FieldTooSmall(PreconditionError):
    """A requested field order cannot host the evaluation points."""


class InsufficientPoints(GraphPirError):
    """Not enough admissible evaluation points (defensive; unreachable
    when the field-size precondition holds)."""


class ComputeModeUnavailable(PreconditionError):
    """Linear-combination retrieval requires X = 0 and rho_min = T + 1."""


class ZeroNormalizer(GraphPirError):
    """A per-message normalizer sum vanished for the chosen points."""


class SingularDecode(GraphPirError):
    """The decode system was singular: indicates corrupted parameters,
    never expected for a well-formed instance."""


class SearchTooLarge(PreconditionError):
    """An exhaustive subset search exceeds its configured cap."""


class GraphTooLarge(PreconditionError):
    """Graph exceeds the enumeration guard for exact matching search."""


class BudgetExceeded(PreconditionError):
    """An exhaustive enumeration would exceed the state budget."""

    def __init__(self, required, budget):
        self.required = required
        self.budget = budget
        super().__init__(
            f"enumeration needs {required} states, budget allows {budget}"
        )
