"""Python client, offline simulator and CLI for the AFLUX materials-database query protocol.

    >>> from aflux import search, K
    >>> result = (search(batch_size=20)
    ...           .select(K.agl_thermal_conductivity_300K)
    ...           .filter(K.Egap > 6)
    ...           .orderby(K.agl_thermal_conductivity_300K, True))
"""

from .errors import AfluxError
from .expr import And, Compare, KeywordNamespace, Literal, Not, Op, Or, compare, normalize
from .results import Entry, Query, ResultSet, search
from .schema import Keyword, KeywordRegistry, Kind, bundled_registry, load_schema
from .structure import AtomicStructure
from .transport import Transport

K = KeywordNamespace(bundled_registry())

__version__ = "0.1.0"

__all__ = [
    "AfluxError", "And", "AtomicStructure", "Compare", "Entry", "K", "Keyword",
    "KeywordRegistry", "Kind", "Literal", "Not", "Op", "Or", "Query", "ResultSet",
    "Transport", "bundled_registry", "compare", "load_schema", "normalize", "search",
]
