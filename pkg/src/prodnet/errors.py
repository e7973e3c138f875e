"""Exception hierarchy.

``ValidationError`` subclasses signal bad input data or configuration (CLI exit
code 2); ``ModelError`` subclasses signal failures during computation (exit 1).
"""


class ProdNetError(Exception):
    """Base class for all package errors."""


class ValidationError(ProdNetError):
    pass


class ModelError(ProdNetError):
    pass


class DimensionMismatch(ValidationError):
    pass


class DuplicateCode(ValidationError):
    pass


class NegativeFlow(ValidationError):
    def __init__(self, row, col, value=None):
        self.row, self.col, self.value = row, col, value
        super().__init__(f"NegativeFlow at ({row}, {col}): {value}")


class NonFiniteValue(ValidationError):
    pass


class MarketClearingViolation(ValidationError):
    def __init__(self, industry, residual):
        self.industry, self.residual = industry, residual
        super().__init__(f"MarketClearingViolation for industry {industry}: residual {residual:.6g}")


class CalendarOrder(ValidationError):
    pass


class ConfigError(ValidationError):
    pass


class SingularSystem(ModelError):
    pass


class NoDataAnywhere(ValidationError):
    pass


class NonPositiveTurnover(ValidationError):
    def __init__(self, year, industry):
        self.year, self.industry = year, industry
        super().__init__(f"NonPositiveTurnover in {year} for industry {industry}")


class EmptyInput(ValidationError):
    pass


class UnmappedTarget(ValidationError):
    def __init__(self, code):
        self.code = code
        super().__init__(f"UnmappedTarget: no source maps to {code!r}")


class ZeroWeightTarget(ValidationError):
    def __init__(self, code):
        self.code = code
        super().__init__(f"ZeroWeightTarget: total weight into {code!r} is zero")


class ZeroLaborIncome(ValidationError):
    pass


class ZeroConsumption(ValidationError):
    pass


class NegativeLabor(ModelError):
    pass


class CriticalOverdraw(ModelError):
    def __init__(self, j, i, need, have):
        self.j, self.i = j, i
        super().__init__(f"CriticalOverdraw: input {j} of industry {i} needs {need:.6g}, stock {have:.6g}")


class AllGoodsShocked(ModelError):
    pass


class NonPositiveIncome(ModelError):
    pass


class ZeroPPI(ValidationError):
    pass


class PanelMismatch(ValidationError):
    pass


class RankDeficient(ModelError):
    pass


class NonPositiveValue(ValidationError):
    def __init__(self, col, row):
        self.col, self.row = col, row
        super().__init__(f"NonPositiveValue in column {col!r}, row {row}")
