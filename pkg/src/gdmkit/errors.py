"""Exception hierarchy shared by all modules."""


class GDMError(Exception):
    """Base class for every error raised by gdmkit."""


class DomainError(GDMError, ValueError):
    """An argument lies outside the documented input domain."""


class PairNotPresentError(DomainError):
    """A requested orbital pair is not contained in the configuration."""


class BasisTagError(GDMError):
    """Two objects expressed in different geminal bases were combined."""


class StructureError(GDMError):
    """A matrix lacks the block structure an operation requires."""


class ResourceLimitError(GDMError):
    """A problem exceeds the configured size limit."""


class DegeneracyError(GDMError):
    """The spectrum is degenerate where a simple spectrum is required.

    Raising the symmetry-breaking strength ``epsilon`` usually fixes this.
    """


class CoverageError(GDMError):
    """An initial configuration uses geminal curves that were not scanned."""


class GridResolutionError(GDMError):
    """Eigenvector tracking stayed ambiguous after maximal grid refinement."""
