"""Degenerations of the plane blown up at ten points, their lemmas and dimension ledgers."""

from .fiber import *  # noqa: F401,F403
from .lemmas import (  # noqa: F401
    CATALOG,
    CatalogError,
    AChoice,
    HypothesisReport,
    RatioError,
    choose_a,
    h_for,
    lemma_check,
)
from .matching import (  # noqa: F401
    COMPLETE_RESTRICTION,
    CORRESPONDENCE_GENERALITY,
    TRANSVERSALITY,
    IncompleteInputError,
    LedgerStep,
    MatchingReport,
    case_174,
    case_193,
    case_348,
    matching_dim,
)
from .scan import ScanRow, scan, scan_pair  # noqa: F401
