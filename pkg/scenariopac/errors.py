class ScenarioError(Exception):
    """Base class for every error raised by scenariopac."""


class InputError(ScenarioError, ValueError):
    """A precondition on the arguments of an operation was violated."""


class UnavailableError(ScenarioError):
    """A quantity the operation needs (closed-form marginal, optimum) is not known."""


class InconsistentRegimeError(ScenarioError):
    """A planner was handed a nonpositive inf-tail probability.

    With tau(eps) = 0 the scenario values cannot converge to the robust optimum,
    so no finite sample size can be recommended.
    """
