"""Exception hierarchy.

Two families matter to callers: ``InvalidInstance`` (bad input, the user's
fault) and ``InvariantBreach`` (a proved property failed at runtime, which
means a bug).  Everything derives from ``AtspError``.
"""


class AtspError(Exception):
    pass


class InvalidInstance(AtspError, ValueError):
    pass


class NotStronglyConnected(InvalidInstance):
    def __init__(self, u, v):
        super().__init__(f"vertex {v} is not reachable from vertex {u}")
        self.pair = (u, v)


class NegativeWeight(InvalidInstance):
    pass


class SelfLoop(InvalidInstance):
    pass


class UnknownEdge(AtspError, KeyError):
    pass


class UnknownVertex(AtspError, KeyError):
    pass


class Unreachable(AtspError):
    pass


class NotBalanced(AtspError):
    def __init__(self, v, out_deg, in_deg):
        super().__init__(f"vertex {v} has out-degree {out_deg} but in-degree {in_deg}")
        self.vertex = v


class NotConnected(AtspError):
    pass


class VertexMissed(AtspError):
    pass


class TooLarge(AtspError):
    pass


class BadSpec(AtspError, ValueError):
    pass


class InvariantBreach(AtspError):
    """A property guaranteed by construction did not hold."""


class Infeasible(InvariantBreach):
    pass


class IterationLimit(InvariantBreach):
    pass


class PartitionNotStronglyConnected(InvalidInstance):
    def __init__(self, index):
        super().__init__(f"part {index} does not induce a strongly connected subgraph")
        self.index = index


class SinglePartError(InvalidInstance):
    pass


class CutBelowOne(InvariantBreach):
    pass


class NoFeasibleCirculation(InvariantBreach):
    pass


class RebalancePathMissing(InvariantBreach):
    pass


class NoProgress(InvariantBreach):
    pass


class PotentialStalled(InvariantBreach):
    pass


class LightnessBreach(InvariantBreach):
    pass


class RestartLimitExceeded(InvariantBreach):
    pass
