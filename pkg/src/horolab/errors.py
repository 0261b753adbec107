"""Exception types shared across the laboratory."""


class HorolabError(Exception):
    """Base class for all laboratory errors."""


class InvalidCasimir(HorolabError):
    """Casimir parameter outside the supported families (mu = 0, or a
    negative value that is not -n^2 + n for an integer lowest weight n >= 2)."""


class TruncationTooSmall(HorolabError):
    """Window too small to hold an interior (K below the minimal size)."""


class NegativeOrderUnsupported(HorolabError):
    """Negative Sobolev orders are diagnostics only, not norms here."""


class DegenerateTruncation(HorolabError):
    """Kernel detection is ill-conditioned: the singular values bracketing
    the threshold differ by less than a factor of 10."""


class RankDeficient(HorolabError):
    """Distribution vectors are numerically dependent; no dual basis."""


class AnnihilatorViolation(HorolabError):
    """Right-hand side pairs nontrivially with an invariant distribution."""


class IllConditioned(HorolabError):
    """Least-squares solve failed or produced non-finite values."""


class CompatibilityViolation(HorolabError):
    """Input pair fails the commuting-action compatibility identity."""


class ColumnObstruction(HorolabError):
    """A column of the transfer problem pairs with an invariant
    distribution beyond tolerance."""

    def __init__(self, column, pairing):
        self.column = int(column)
        self.pairing = float(pairing)
        super().__init__(
            f"column {self.column}: invariant pairing {self.pairing:.3e}"
        )


class StageObstruction(HorolabError):
    """A cascade stage input carries an invariant component beyond the
    requested obstruction tolerance."""

    def __init__(self, factor, stage, slot, size):
        self.factor = int(factor)
        self.stage = int(stage)
        self.slot = str(slot)
        self.size = float(size)
        super().__init__(
            f"factor {self.factor} stage {self.stage} ({self.slot}): "
            f"invariant component {self.size:.3e}"
        )


class ConfigError(HorolabError):
    """Base for configuration problems (exit code 2 territory)."""


class ConfigParse(ConfigError):
    """Config file unreadable or not valid JSON."""


class SchemaViolation(ConfigError):
    """Config parsed but does not satisfy the documented schema."""


class AssertionFailed(HorolabError):
    """A requested run-time assertion did not hold (exit code 1)."""
