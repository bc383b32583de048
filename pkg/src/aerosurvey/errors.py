"""Exception taxonomy.

Every operation raises a named subclass of AerosurveyError so callers (and
the CLI exit-code mapper) can tell input problems from analysis outcomes.
"""


class AerosurveyError(Exception):
    """Base class for all package errors."""


# --- file / schema problems (CLI exit code 2) ---

class MissingColumnError(AerosurveyError):
    """CSV header lacks a column required by the declared schema."""


class EmptyFileError(AerosurveyError):
    """CSV contains a header but no data rows (or nothing at all)."""


class NonMonotoneTimeError(AerosurveyError):
    """Timestamps not strictly increasing (strict ingestion mode only)."""


# --- precondition violations on otherwise well-formed data ---

class TooFewSamplesError(AerosurveyError):
    """Operation needs more samples than the input provides."""


class TooShortError(AerosurveyError):
    """Series shorter than the operation's minimum length."""


class NonUniformSeriesError(AerosurveyError):
    """Spectral analysis requires uniform sampling; resample first."""


class NonPositiveParameterError(AerosurveyError):
    """A physical parameter that must be strictly positive is not."""


class NonPositiveFactorError(AerosurveyError):
    """Amplitude ratio must be > 0 to express in dB."""


class ZeroAfterAmplitudeError(AerosurveyError):
    """Reduction factor undefined: the 'after' trace has zero RMS."""


class NoCandidatesError(AerosurveyError):
    """Configuration ranking called with an empty candidate list."""


class TraceTooShortError(AerosurveyError):
    """Trace does not span enough time for the detrend window."""


class TooFewSeparationsError(AerosurveyError):
    """Noise curve needs at least 3 distinct separations."""


class InvalidRankError(AerosurveyError):
    """Requested component count outside 1..min(rows, cols)."""


class TooFewPixelsError(AerosurveyError):
    """Standard deviation needs at least 2 valid pixels."""


class SlackCableError(AerosurveyError):
    """UAV tilt beyond the taut-cable model's validity range."""


class DegeneratePlanError(AerosurveyError):
    """Flight plan cannot be turned into a flyable path."""


class BaseDoesNotCoverError(AerosurveyError):
    """Base-station record does not span the rover's time range."""


# --- analysis outcomes (data is fine, the answer is 'no'; CLI exit code 3) ---

class NeverBelowFloorError(AerosurveyError):
    """Noise amplitude exceeds the floor at every measured separation."""


class NoFitAvailableError(AerosurveyError):
    """Operation needs a fitted decay law and the curve has none."""


class NeverSettlesError(AerosurveyError):
    """Swing never stays below the threshold within the series."""


class NoIntersectionsError(AerosurveyError):
    """No geometric crossover between flight and tie lines."""


class PipelineStageError(AerosurveyError):
    """A pipeline stage raised; carries the stage name and partial report."""

    def __init__(self, stage: str, cause: Exception, partial_report=None):
        super().__init__(f"stage '{stage}' failed: {cause}")
        self.stage = stage
        self.cause = cause
        self.partial_report = partial_report
