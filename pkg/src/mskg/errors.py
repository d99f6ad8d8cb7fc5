"""Exception hierarchy shared across the package."""

from __future__ import annotations


class MskgError(Exception):
    """Base class for every domain error raised by this package."""


# graph layer

class DuplicateId(MskgError):
    pass


class FrozenGraph(MskgError):
    pass


class SchemaViolation(MskgError):
    pass


class WeightOutOfRange(MskgError):
    pass


class CycleIntroduced(MskgError):
    pass


class MissingEndpoint(MskgError):
    pass


class UnknownNode(MskgError):
    pass


class WrongLabel(MskgError):
    pass


# ingest layer

class ParseError(MskgError):
    def __init__(self, message: str, line: int):
        super().__init__(f"line {line}: {message}")
        self.line = line


class ManifestMismatch(MskgError):
    def __init__(self, report):
        super().__init__("manifest mismatch:\n" + report.to_text())
        self.report = report


class UnsupportedFormat(MskgError):
    pass


# extraction layer

class ClassifierUnavailable(MskgError):
    pass


class EmptyGold(MskgError):
    pass


# embedding layer

class DegenerateCorpus(MskgError):
    pass


class TooFewPoints(MskgError):
    pass


class PerplexityTooLarge(MskgError):
    pass


class KTooLarge(MskgError):
    pass


class SingleCluster(MskgError):
    pass


# classifier layer

class UnknownManufacturer(MskgError):
    pass


class ShapeMismatch(MskgError):
    pass


class EmptyTrainingSet(MskgError):
    pass


class TooFewSamples(MskgError):
    pass


class ModelUnavailable(MskgError):
    pass


# metrics layer

class SingleClass(MskgError):
    pass


class EmptyRanking(MskgError):
    pass


class EmptyQuerySet(MskgError):
    pass


# query layer

class MsqlSyntaxError(MskgError):
    def __init__(self, message: str, line: int, column: int, expected: tuple[str, ...] = ()):
        loc = f"{line}:{column}"
        if expected:
            message = f"{message} (expected {', '.join(expected)})"
        super().__init__(f"{loc}: {message}")
        self.line = line
        self.column = column
        self.expected = expected


class UnboundVariable(MskgError):
    pass


class NestedAggregate(MskgError):
    pass


class UnknownLabel(MskgError):
    pass


class UnknownRelation(MskgError):
    pass


class UnknownProperty(MskgError):
    pass


# qa layer

class MissingEmbedding(MskgError):
    pass


class NoTemplateMatch(MskgError):
    pass


class PortOutputInvalid(MskgError):
    pass


class UnsupportedQuestion(MskgError):
    pass


class PortUnavailable(MskgError):
    pass


class StageFailure(MskgError):
    """Downstream failure annotated with the answering stage that raised it."""

    def __init__(self, stage: str, cause: Exception):
        super().__init__(f"stage {stage}: {cause}")
        self.stage = stage
        self.cause = cause


# serve layer

class ValidationFailed(MskgError):
    pass
