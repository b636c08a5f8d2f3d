"""Exception hierarchy.

Two broad families matter for the CLI exit-code mapping: ModelError
(bad or unusable input, exit 2) and NumericalError (a routine could not
deliver its contract, exit 3).  Correspondence failure is not an
exception; `verify` reports it and the CLI maps it to exit 4.
"""


class TopobandError(Exception):
    """Base class for every deliberate raise in this package."""


class ModelError(TopobandError):
    """The input model is malformed or violates a precondition."""


class NumericalError(TopobandError):
    """A numerical routine failed to meet its contract."""


# ---- input / model problems ------------------------------------------------

class ParseError(ModelError):
    """File or field could not be parsed."""


class SchemaError(ModelError):
    """Model dictionary violates the JSON schema."""


class MalformedModel(ModelError):
    """Inconsistent model data (shapes, class constraints, harmonics)."""


class ClassMismatch(ModelError):
    """Operation applied to a model of the wrong symmetry class."""


class Gapless(ModelError):
    """Spectral gap below threshold; invariants undefined."""


class BadIndex(ModelError):
    """Gamma-matrix index out of range."""


class NotSingularHopping(ModelError):
    """Hopping matrix lacks the required zero column."""


# ---- numerics kernels --------------------------------------------------------

class NotHermitian(NumericalError):
    pass


class DidNotConverge(NumericalError):
    pass


class ZeroPolynomial(NumericalError):
    pass


class NotAntisymmetric(NumericalError):
    pass


class OddDimension(NumericalError):
    pass


# ---- decomposition / geometry ------------------------------------------------

class NotDirac(NumericalError):
    """Hamiltonian content does not close on an anticommuting gamma set."""


class NonzeroTracePart(NumericalError):
    """Identity component h0 nonzero where invariants require it to vanish."""


class ZeroHopping(NumericalError):
    """b = 0: no ellipse, edge analysis undefined."""


class DegenerateEllipse(NumericalError):
    """Ellipse collapsed to a segment; enclosure is a boundary case."""


class LambdaZero(NumericalError):
    """eta(lambda) evaluated at lambda = 0."""


# ---- invariants ---------------------------------------------------------------

class GapClosed(NumericalError):
    """|T(k)| (or another gap proxy) vanished on the sample grid."""


class MethodDisagreement(NumericalError):
    """Two routes to the same invariant returned different values."""


class DegenerateZero(NumericalError):
    """Preimage with near-singular Jacobian; regular-value assumption broken."""


class DegenerateJacobian(NumericalError):
    """Incipience point where the in-plane Jacobian is too small to sign."""


class TangentCrossing(NumericalError):
    """Crossing without a resolvable sign change / slope."""


class GapClosedAtTrim(NumericalError):
    pass


class NotTRI(NumericalError):
    pass


class DegeneracyMismatch(NumericalError):
    """Occupied space at a TRIM point is not two-dimensional."""


# ---- edge spectra and indices ---------------------------------------------------

class TrackingAmbiguity(NumericalError):
    """Branch continuation had irresolvably close candidates."""


class StripTooShort(NumericalError):
    """Truncation error incompatible with the requested tolerance."""


class MixedChirality(NumericalError):
    """A zero mode failed to be a chirality eigenstate."""


class OddCount(NumericalError):
    """Crossing count odd where time reversal guarantees evenness."""


class UnresolvedCrossing(NumericalError):
    """More than one crossing inside a single grid cell."""


class UnresolvedSignChange(NumericalError):
    """Sign change of M(k2) could not be localized on the grid."""


class EndpointZero(NumericalError):
    """M(k2) vanishes at an endpoint TRIM value."""
