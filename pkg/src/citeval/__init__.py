"""Field-normalized citation scoring with value-weighted citations.

The pipeline ingests a publication/citation corpus, computes per-group
baselines, scores every cited publication under the plain and the
value-weighted indicator, and compares the two through regression,
dispersion and top-percentile reports. A deterministic synthetic-corpus
generator supports property tests and desk-scale runs.
"""

from .baselines import (
    BetaConvention,
    GroupBaseline,
    beta_from_ratio,
    compute_group_baselines,
    derive_beta,
)
from .corpus import (
    CitationCorpus,
    CitationEdge,
    GroupKey,
    PublicationRecord,
    build_corpus,
    load_snapshot,
    parse_citations,
    parse_publications,
    write_snapshot,
)
from .errors import CitevalError, DegenerateDataError, ValidationError
from .indicators import (
    IndicatorScores,
    ModelConfig,
    compute_all,
    compute_c,
    cv_star_exponential,
    cv_star_power,
    f_gain,
)
from .synth import SplitMix64, SynthSpec, generate

__version__ = "0.1.0"

__all__ = [
    "BetaConvention",
    "CitationCorpus",
    "CitationEdge",
    "CitevalError",
    "DegenerateDataError",
    "GroupBaseline",
    "GroupKey",
    "IndicatorScores",
    "ModelConfig",
    "PublicationRecord",
    "SplitMix64",
    "SynthSpec",
    "ValidationError",
    "beta_from_ratio",
    "build_corpus",
    "compute_all",
    "compute_c",
    "compute_group_baselines",
    "cv_star_exponential",
    "cv_star_power",
    "derive_beta",
    "f_gain",
    "generate",
    "load_snapshot",
    "parse_citations",
    "parse_publications",
    "write_snapshot",
    "__version__",
]
