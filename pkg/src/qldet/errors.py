"""Exception and warning types shared across the toolkit.

The CLI maps :class:`InputError` subclasses to exit code 2 and
:class:`NumericalError` subclasses to exit code 3.
"""


class QldetError(Exception):
    """Base class for all toolkit errors."""


class InputError(QldetError):
    """An input (transfer function, network, config) is invalid or unphysical."""


class NumericalError(QldetError):
    """A numerical procedure failed to reach its stated tolerance."""


class PoleHit(InputError):
    """Rational function evaluated at (or too close to) one of its poles."""


class NotRealizable(InputError):
    """Transfer function violates a physical-realizability condition."""


class ImproperTransferFunction(InputError):
    """Numerator degree exceeds denominator degree."""


class SingularResolvent(InputError):
    """Frequency response requested at a system pole."""


class SingularTransform(InputError):
    """Similarity transformation matrix is singular."""


class NoSolution(NumericalError):
    """The joint realizability constraint system is inconsistent."""


class WrongInertia(InputError):
    """Hermitian matrix eigenvalue signs are incompatible with J."""


class NotPhysical(InputError):
    """State space does not pass the physical-realizability certificate."""


class UnsupportedDimension(InputError):
    """Operation only implemented for a restricted number of modes."""


class ChainResonance(InputError):
    """Auxiliary-chain block is singular at the requested frequency."""


class OnResonance(InputError):
    """Signal response requested exactly on the shifted resonance."""


class BasisMismatch(InputError):
    """Observables are expressed over different doubled bases."""


class IntegrationFailure(NumericalError):
    """Adaptive quadrature did not converge to the requested tolerance."""


class NonUniqueSolutionWarning(UserWarning):
    """Realizability constraint solve was rank deficient; minimum-norm X returned."""


class NearThresholdWarning(UserWarning):
    """System is within 1e-6 (relative) of an instability threshold."""
