"""Exception hierarchy shared by the engines, the numeric models and the CLI."""

from __future__ import annotations


class SeminormLabError(RuntimeError):
    """Base exception for all library failures."""


class InputError(SeminormLabError):
    """Raised when an input violates an operation's precondition.

    The CLI maps every subclass to exit code 64.
    """


class IncomparableCardinals(InputError):
    """Raised when the order of two cardinals depends on the continuum hypothesis."""


class MismatchedSpace(InputError):
    """Raised when two seminorms live on different presentations."""


class UncountableIndex(InputError):
    """Raised when a max-form block seminorm is requested on an uncountable sum."""


class FiniteTheta(InputError):
    """Raised when a theta-np query is made with a finite cardinal."""


class CompactBase(InputError):
    """Raised when a compact base space is passed where non-compactness is assumed."""


class CompactSpace(CompactBase):
    """Raised by the covering number computation for compact spaces."""


class InconsistentDescription(InputError):
    """Raised when declared cover size and component count disagree."""


class DegreeViolation(InputError):
    """Raised when the target degree exceeds the sum of the source degrees."""


class ShapeMismatch(InputError):
    """Raised when matrices, vectors or grids do not have compatible shapes."""


class NonPositiveEntry(InputError):
    """Raised when a constant that must be strictly positive is not."""


class MissingCert(InputError):
    """Raised when a required domination or continuity certificate is absent."""


class IndexBeyondTruncation(InputError):
    """Raised when a prefix index exceeds the model's truncation."""


class StencilTooWide(InputError):
    """Raised when a finite-difference stencil needs more samples than available."""


class NonAbelianUnsupported(InputError):
    """Raised when a left/right invariant norm is requested on a model without a faithful reduction."""


class NonPositiveT(InputError):
    """Raised when a bump scaling parameter is not strictly positive."""


class OverflowOutsideWindow(InputError):
    """Raised when a truncated-integer convolution would leave its window."""


class UnevaluableSeminorm(InputError):
    """Raised when a seminorm expression has no evaluator on the given model."""


class GridTooCoarse(SeminormLabError):
    """Raised when the bump grid refinement self-check fails."""
