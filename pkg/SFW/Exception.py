"""
    Exception.py

    Errors raised by the workbench. Every error carries a `.code` which
    is also the exit status the scenario runner terminates with.
"""


class SFWException(Exception):
    """
    Base exception class representing a workbench error.

    Every specific workbench exception is a subclass of this
    and exposes two instance variables `.code` (exit status)
    and `.message` (error text).
    """

    def __init__(self, message, code=1):
        """Initialize the exception."""
        super(SFWException, self).__init__(message)
        self.message = message
        self.code = code


class SFWInputException(SFWException):
    """Represents bad arguments: foreign objects, missing stages, wrong cofinality. Default code is 2."""

    def __init__(self, message, code=2):
        """Initialize the exception."""
        super(SFWInputException, self).__init__(message, code)


class SFWStructureException(SFWException):
    """Represents objects that violate their own axioms or live in the wrong ambient group. Default code is 2."""

    def __init__(self, message, code=2):
        """Initialize the exception."""
        super(SFWStructureException, self).__init__(message, code)


class SFWBudgetException(SFWException):
    """Represents a computation refused because it exceeds its configured budget. Default code is 1."""

    def __init__(self, message, code=1):
        """Initialize the exception."""
        super(SFWBudgetException, self).__init__(message, code)


class SFWCheckException(SFWException):
    """Represents a failed invariant. Default code is 1."""

    def __init__(self, message, invariant="", code=1):
        """Initialize the exception."""
        super(SFWCheckException, self).__init__(message, code)
        self.invariant = invariant


# input errors

class MismatchedAtomTable(SFWInputException):
    """Ordinals declared over different atom tables."""


class PointNotBelowLambda(SFWInputException):
    """A described stage is not below the limit it is bounded against."""


class UnboundVariable(SFWInputException):
    """A formula refers to a variable the environment does not cover."""


class ArityMismatch(SFWInputException):
    """A name constructor got the wrong number or kind of arguments."""


class ForeignCondition(SFWInputException):
    """A condition does not belong to the poset acted on."""


class NotAnIterationObject(SFWInputException):
    """Supports are only defined over iteration posets."""


class StageMissing(SFWInputException):
    """The stage a successor is built on does not exist."""


class StageMismatch(SFWInputException):
    """A group element and a condition come from different stages."""


class StageSchemaMissing(SFWInputException):
    """A limit was requested without a uniform schema below it."""


class StageOutOfRange(SFWInputException):
    """A stage index is not below the iteration length."""


class NotALimit(SFWInputException):
    """A limit stage was requested at zero or a successor ordinal."""


class WrongCofinality(SFWInputException):
    """The operation is not claimed at this cofinality."""


class WitnessNotFinite(SFWInputException):
    """A stabilizer witness must be a finite list of head pullbacks."""


class WrongMode(SFWInputException):
    """The limit filter is in the other closure mode. Carries the counterpart report."""

    def __init__(self, message, counterpart=None, code=2):
        """Initialize the exception."""
        super(WrongMode, self).__init__(message, code)
        self.counterpart = counterpart


# structure errors

class InvalidFilter(SFWStructureException):
    """A condition set is not upward closed or not directed."""


class NotAPosetName(SFWStructureException):
    """Some valuation of a second-factor name is not a poset."""


class MixedRepresentation(SFWStructureException):
    """Explicit and symbolic subgroups cannot be combined."""


class CodomainMismatch(SFWStructureException):
    """A subgroup or filter does not live on the codomain of the homomorphism."""


class AmbientMismatch(SFWStructureException):
    """A subgroup does not live in the ambient group of the filter."""


class NotAFilter(SFWStructureException):
    """The family fails the normal filter axioms."""


class NotAnInclusion(SFWStructureException):
    """Filter restriction needs an inclusion homomorphism."""


class GroupTooLarge(SFWStructureException):
    """Exhaustive lattice work is capped by the configured group order."""


class NotAGroup(SFWStructureException):
    """An element list is not closed under composition and inverse."""


class NotAnAutomorphism(SFWStructureException):
    """A map is not an order automorphism fixing the top condition."""


# budget and check errors

class OutOfBudget(SFWBudgetException):
    """The bounded power-name collection is outside its budget."""


class CorpusNotHS(SFWCheckException):
    """A closure-suite corpus name is not hereditarily symmetric."""


class StageBoundingViolated(SFWCheckException):
    """A countable set of stages is cofinal in a limit of uncountable cofinality."""

    def __init__(self, message, invariant="stage-bounding", code=1):
        """Initialize the exception."""
        super(StageBoundingViolated, self).__init__(message, invariant, code)
