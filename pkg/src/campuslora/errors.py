"""Exception and warning types shared across the toolkit."""


class CampusLoraError(Exception):
    """Base class for all toolkit errors."""


class ValidationError(CampusLoraError):
    """Base for errors caused by invalid configuration or arguments.

    The CLI maps these to exit code 1; every other error exits 2.
    """


# timestamps and domain types

class MalformedTimestamp(CampusLoraError):
    """Date or time string does not match the dataset's textual grammar."""


class InvalidCalendar(CampusLoraError):
    """Shape is fine but the calendar values are out of range (month 13, ...)."""


class AmbiguousKind(CampusLoraError):
    """Field set matches zero or more than one device kind signature."""


# ingest

class MissingHeader(CampusLoraError):
    """CSV header line absent or not the expected schema."""


class SeriesTooShort(CampusLoraError):
    """Numeric series shorter than the operation requires."""


# simnet / configs

class InvalidConfig(ValidationError):
    """A configuration object violates its invariants."""


# grid alignment and gap detection

class EmptyInput(CampusLoraError):
    """Operation requires at least one element."""


class MixedDevices(CampusLoraError):
    """Input rows belong to more than one device."""


class NonMonotonicTime(CampusLoraError):
    """Timestamps are not sorted in non-decreasing order."""


# imputation

class InsufficientSupport(CampusLoraError):
    """Not enough present cells / neighbor rows for the chosen strategy."""


class MissingCompanions(CampusLoraError):
    """KNN imputation requested without companion series."""


class DegenerateDesign(CampusLoraError):
    """Design matrix is rank-deficient (e.g. repeated x values)."""


# neural kernels

class DimMismatch(CampusLoraError):
    """Vector/matrix dimensions do not chain."""


class ShapeMismatch(CampusLoraError):
    """Parameter and gradient/accumulator shapes do not mirror each other."""


class EmptySequence(CampusLoraError):
    """Recurrent forward pass requires a nonempty sequence."""


class NonFiniteLoss(CampusLoraError):
    """Loss evaluated to inf or nan."""


# pipeline

class RatioInvalid(ValidationError):
    """Split ratios are negative or do not sum to one."""


class EmptyClass(CampusLoraError):
    """A class has zero rows where at least one is required."""


# metrics

class LengthMismatch(CampusLoraError):
    """Paired arrays differ in length."""


class EmptyMatrix(CampusLoraError):
    """Confusion matrix has no classes or no counted samples."""


class UnknownLabel(CampusLoraError):
    """A label does not belong to the declared class list."""


# cli

class ConfigInvalid(ValidationError):
    """Config file or flag value failed validation."""


class UnknownSubcommand(ValidationError):
    """argv does not select a known subcommand."""


# warnings (recoverable anomalies, reported via warnings.warn)

class SlotCollisionWarning(UserWarning):
    """Two readings snapped to the same grid slot; the later one won."""


class DuplicateCounterWarning(UserWarning):
    """Two consecutive packets carry the same frame counter."""


class CounterAnomalyWarning(UserWarning):
    """Counter jump exceeds the plausibility cap; treated as a device reset."""
