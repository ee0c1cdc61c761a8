from compstat.codecs.api import (
    BACKENDS,
    CompressorSpec,
    Conditioner,
    compress_length,
    condition_on,
    conditional_length,
    delta_statistic,
    induced_probability,
    kraft_sum,
    symbol_costs,
)
from compstat.codecs.sequence import Alphabet, Sequence, check_same_alphabet, concat

__all__ = [
    "BACKENDS",
    "Alphabet",
    "CompressorSpec",
    "Conditioner",
    "Sequence",
    "check_same_alphabet",
    "compress_length",
    "concat",
    "condition_on",
    "conditional_length",
    "delta_statistic",
    "induced_probability",
    "kraft_sum",
    "symbol_costs",
]
