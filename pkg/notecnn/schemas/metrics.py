from typing import List, Optional

from attrs import define, field, validators


@define(frozen=True)
class ConfusionMatrix:
    """Counts with readmission as the positive class."""

    tp: int = field(validator=validators.ge(0))
    fp: int = field(validator=validators.ge(0))
    fn: int = field(validator=validators.ge(0))
    tn: int = field(validator=validators.ge(0))

    @property
    def total(self) -> int:
        return self.tp + self.fp + self.fn + self.tn


@define(frozen=True)
class MetricReport:
    precision: float
    recall: float
    f1: float
    accuracy: float
    counts: ConfusionMatrix
    task: Optional[str] = None
    model: Optional[str] = None
    # names of metrics whose denominator was zero and were reported as 0
    degenerate: List[str] = field(factory=list)

    @property
    def is_degenerate(self) -> bool:
        return bool(self.degenerate)


@define(frozen=True)
class ContingencyTable:
    o_yes_pos: int
    o_yes_neg: int
    o_no_pos: int
    o_no_neg: int

    @property
    def observed(self) -> List[int]:
        return [self.o_yes_pos, self.o_yes_neg, self.o_no_pos, self.o_no_neg]

    @property
    def total(self) -> int:
        return sum(self.observed)

    @property
    def expected(self) -> List[float]:
        n = self.total
        if n == 0:
            return [0.0, 0.0, 0.0, 0.0]
        yes = self.o_yes_pos + self.o_yes_neg
        no = self.o_no_pos + self.o_no_neg
        pos = self.o_yes_pos + self.o_no_pos
        neg = self.o_yes_neg + self.o_no_neg
        return [yes * pos / n, yes * neg / n, no * pos / n, no * neg / n]


@define(frozen=True)
class FeatureScore:
    term: str
    chi2: float = field(validator=validators.ge(0.0))
    table: ContingencyTable


@define(frozen=True)
class FrequencyRow:
    term: str
    # None means the term is outside that class's top-K frequency list
    count_pos: Optional[int]
    count_neg: Optional[int]
    n_pos: int
    n_neg: int
