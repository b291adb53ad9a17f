"""Exception hierarchy.

Every error carries a short machine-readable ``code`` used by the CLI when
mapping failures to exit codes.
"""

from __future__ import annotations


class SccError(Exception):
    code = "ERROR"


class ModelError(SccError):
    """Configuration or modelling-assumption failure."""

    code = "MODEL_ERROR"


class InvalidConfig(ModelError):
    code = "INVALID_CONFIG"

    def __init__(self, message: str, report=None):
        super().__init__(message)
        self.report = report


class ConfigSchemaError(ModelError):
    code = "CONFIG_SCHEMA"


class AtomOutOfRange(ModelError):
    code = "ATOM_OUT_OF_RANGE"


class NumericalError(SccError):
    code = "NUMERICAL_ERROR"


class RankDeficient(NumericalError):
    code = "RANK_DEFICIENT"


class PoleHit(NumericalError):
    code = "POLE_HIT"


class DenominatorVanishes(NumericalError):
    code = "DENOMINATOR_VANISHES"

    def __init__(self, factor: str, value: complex | None = None):
        msg = f"denominator '{factor}' vanishes"
        if value is not None:
            msg += f" (value {value!r})"
        super().__init__(msg)
        self.factor = factor


class BracketSingular(NumericalError):
    code = "BRACKET_SINGULAR"

    def __init__(self, atom_index: int, message: str = ""):
        super().__init__(message or f"integrand bracket singular at atom {atom_index}")
        self.atom_index = atom_index


class NoConvergence(NumericalError):
    code = "NO_CONVERGENCE"


class WrongBranch(NumericalError):
    code = "WRONG_BRANCH"
