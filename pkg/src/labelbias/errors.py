"""Exception types raised across the package."""


class LabelBiasError(ValueError):
    """Base class for every error raised by labelbias."""


class InvalidParamsError(LabelBiasError):
    pass


class SingularSystemError(LabelBiasError):
    pass


class NotStandardizedError(LabelBiasError):
    pass


class SingularConditioningSetError(LabelBiasError):
    pass


class MissingRoleError(LabelBiasError):
    pass


class NonGaussianInputError(LabelBiasError):
    pass


class DegenerateDesignError(LabelBiasError):
    """Residualization design (intercept plus retained features) is singular."""


class SingularDesignError(LabelBiasError):
    pass


class SeparationError(LabelBiasError):
    pass


class DegenerateTargetError(LabelBiasError):
    pass


class MissingFeatureError(LabelBiasError):
    pass


class LengthMismatchError(LabelBiasError):
    pass


class AucUndefinedError(LabelBiasError):
    pass


class InvalidVarianceError(LabelBiasError):
    pass


class InvalidConfigError(LabelBiasError):
    pass


class MissingColumnsError(LabelBiasError):
    pass


class UnmappedColumnError(LabelBiasError):
    pass


class EmptyAfterFilteringError(LabelBiasError):
    pass


class CapacityError(LabelBiasError):
    pass
