class PfenkfError(Exception):
    """Base class of every error raised by the numerical apps."""


class MeshError(PfenkfError):
    pass


class SensorOutsideMeshError(MeshError):

    def __init__(self, point):
        self.point = tuple(float(c) for c in point)
        super().__init__(f"sensor outside mesh: {self.point}")


class AssemblyError(PfenkfError):

    def __init__(self, element, message='non-finite entries'):
        self.element = int(element)
        super().__init__(f"{message} in element {self.element}")


class NewtonConvergenceError(PfenkfError):

    def __init__(self, residual_norm, trace, stage=None):
        self.residual_norm = float(residual_norm)
        self.trace = list(trace)
        self.stage = stage
        where = f" ({stage})" if stage else ''
        super().__init__(
            f"Newton did not converge{where} after {len(self.trace)} iterations, "
            f"last residual norm {self.residual_norm:.3e}"
        )


class LoadStepError(PfenkfError):

    def __init__(self, step, cause):
        self.step = int(step)
        self.cause = cause
        super().__init__(f"load step {self.step} failed after cutting: {cause}")


class RegularizationError(PfenkfError):

    def __init__(self, stage, cause):
        self.stage = stage
        self.cause = cause
        super().__init__(f"regularization failed at stage {stage}: {cause}")


class EnsembleError(PfenkfError):
    pass


class EnsembleCollapseError(EnsembleError):

    def __init__(self, n_failed, n_members, step):
        self.n_failed = n_failed
        self.n_members = n_members
        self.step = step
        super().__init__(
            f"{n_failed} of {n_members} members failed by step {step}; aborting the run"
        )


class PriorSamplingError(EnsembleError):
    pass


class ObservationError(PfenkfError):
    pass


class CovarianceNotPositiveDefinite(PfenkfError):

    def __init__(self, smallest_pivot, what='G'):
        self.smallest_pivot = float(smallest_pivot)
        super().__init__(
            f"{what} is not positive definite (smallest pivot {self.smallest_pivot:.3e})"
        )


class ExperimentConfigError(PfenkfError):

    def __init__(self, errors):
        self.errors = errors
        super().__init__(f"invalid experiment configuration: {errors}")
