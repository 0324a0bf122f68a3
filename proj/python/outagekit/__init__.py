"""outagekit: multi-plane Internet shutdown measurement toolkit.

Thin Python surface over the C++ core. The heavy lifting (MRT parsing,
prefix-containment coverage, verdict classification, scan analytics)
lives in the compiled ``_core`` extension.
"""

from ._core import (
    OutcomeKind,
    Verdict,
    classify,
    compute_coverage,
    consensus,
    country_asns,
    country_prefixes,
    decompose_interval,
    derive_target,
    originated_prefixes,
    parse_bview,
    reduction,
    __version__,
)

__all__ = [
    "OutcomeKind",
    "Verdict",
    "classify",
    "compute_coverage",
    "consensus",
    "country_asns",
    "country_prefixes",
    "decompose_interval",
    "derive_target",
    "originated_prefixes",
    "parse_bview",
    "reduction",
    "__version__",
]
