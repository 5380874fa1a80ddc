from .bureskit import bureskit  # noqa
from .errors import (  # noqa
    BuresError,
    ConditioningError,
    GenericityError,
    SingularStateError,
    ValidationError,
)
from .matrixfile import MatrixFile  # noqa
from .metric import MetricReport, TangentSplit, bures, project_parallel  # noqa
from .states import (  # noqa
    StateMatrix,
    TangentMatrix,
    Xorshift64Star,
    random_state,
    random_tangent,
)
from .utils import Tolerances  # noqa
