"""Exception hierarchy shared by every hwpd module.

Each leaf class name is what the CLI prints on stderr for a data error.
"""


class HwpdError(Exception):
    """Root of all hwpd data errors."""


class SignalError(HwpdError):
    pass


class FeatureError(HwpdError):
    pass


class ClassificationError(HwpdError):
    pass


class EvaluationError(HwpdError):
    pass


class SynthError(HwpdError):
    pass


class DatasetNotFound(HwpdError, FileNotFoundError):
    pass


class IoFailure(HwpdError, OSError):
    pass


# signal-core
class MalformedRow(SignalError, ValueError):
    pass


class NonMonotonicTime(SignalError, ValueError):
    pass


class EmptyRecording(SignalError, ValueError):
    pass


class DegenerateRecording(SignalError, ValueError):
    pass


class NoStrokes(SignalError):
    pass


class TooShort(SignalError, ValueError):
    pass


# nonlinear features
class SeriesTooShort(FeatureError, ValueError):
    pass


class SeriesDegenerate(FeatureError, ValueError):
    pass


class TooFewPoints(FeatureError, ValueError):
    pass


class NoScalingRegion(FeatureError):
    pass


class ZeroVariance(FeatureError, ValueError):
    pass


class SilentSignal(FeatureError, ValueError):
    pass


class NoExtrema(FeatureError):
    pass


# neuromotor features
class InvalidParams(FeatureError, ValueError):
    pass


class NoPeak(FeatureError):
    pass


class FitDiverged(FeatureError):
    pass


class EmptyFit(FeatureError):
    pass


# assembly
class EmptyInput(FeatureError, ValueError):
    pass


class ManifestMismatch(FeatureError):
    pass


class TooFewRows(FeatureError, ValueError):
    pass


# classification
class SingleClass(ClassificationError, ValueError):
    pass


class NonFiniteFeature(ClassificationError, ValueError):
    pass


class NoConvergence(ClassificationError):
    pass


class DimensionMismatch(ClassificationError, ValueError):
    pass


# evaluation
class MissingTask(EvaluationError):
    pass


class NoScores(EvaluationError):
    pass


class ProtocolLeak(EvaluationError):
    pass


# synth
class InvalidProfile(SynthError, ValueError):
    pass
