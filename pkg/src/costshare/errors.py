"""Exception hierarchy. Each class carries the CLI exit code it maps to."""


class CostShareError(Exception):
    exit_code = 2


class BadInput(CostShareError):
    exit_code = 2


class CycleDetected(BadInput):
    pass


class MalformedTable(BadInput):
    pass


class NotConcave(BadInput):
    pass


class InvalidEps(BadInput):
    pass


class InfiniteCost(BadInput):
    pass


class NotSymmetric(BadInput):
    pass


class Unreachable(BadInput):
    pass


class ZeroUnitCost(BadInput):
    pass


class TerminalMismatch(BadInput):
    pass


class EdgeCoverage(BadInput):
    pass


class ShareExceedsCost(BadInput):
    pass


class ProtocolInapplicable(BadInput):
    pass


class BadParams(BadInput):
    pass


class KTooSmall(BadParams):
    pass


class PathExplosion(CostShareError):
    exit_code = 3

    def __init__(self, count, cap):
        super().__init__(f"enumeration exceeds cap: {count} > {cap}")
        self.count = count
        self.cap = cap


class VerificationFailed(CostShareError):
    exit_code = 4


class NoEquilibrium(VerificationFailed):
    pass


class TieDetected(CostShareError):
    exit_code = 5


class IoFailure(CostShareError):
    exit_code = 6
