from . import errors
from .base import GROWTH_METHOD, VERDICT
from .freegroup import (ConjClass, Letter, canonical_class, class_count, enumerate_classes, invert_class,
                        parse_word, primitive_class_count, reduce)
from .growth import GrowthEstimate, WindowPolicy, entropy, growth_rate
from .manhattan import (CorrelationReport, ManhattanCurve, correlate, correlation_count, correlation_mins,
                        correlation_tangent, pinching_demo, pressure_intersections, sample_curve)
from .representation import (LengthFunctional, Representation, contragredient, evaluate, jordan_projection,
                             length, schottky_pair, sym_power_embed, validate_loxodromy)
from .spectrum import CountingFunction, SpectrumTable, compute_spectrum, counting, load_table, save_table, systole

__all__ = [
    "errors",
    "GROWTH_METHOD",
    "VERDICT",
    "Letter",
    "ConjClass",
    "reduce",
    "parse_word",
    "canonical_class",
    "invert_class",
    "class_count",
    "primitive_class_count",
    "enumerate_classes",
    "Representation",
    "LengthFunctional",
    "evaluate",
    "jordan_projection",
    "length",
    "sym_power_embed",
    "contragredient",
    "schottky_pair",
    "validate_loxodromy",
    "SpectrumTable",
    "CountingFunction",
    "compute_spectrum",
    "counting",
    "systole",
    "save_table",
    "load_table",
    "WindowPolicy",
    "GrowthEstimate",
    "growth_rate",
    "entropy",
    "ManhattanCurve",
    "CorrelationReport",
    "sample_curve",
    "pressure_intersections",
    "correlation_tangent",
    "correlation_mins",
    "correlation_count",
    "correlate",
    "pinching_demo",
]

__version__ = "0.1.0"
