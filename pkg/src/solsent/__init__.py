"""solsent: solar-energy social-media sentiment pipeline and statistics."""

from .aggregate import DailyPoint, StateSentiment, daily_series, national_average, state_scores, wilson_interval
from .classify import (
    AnnotatedExample,
    BaselineClassifier,
    BaselineBackend,
    EvalMetrics,
    ExternalBackend,
    SentimentPrediction,
    SplitSpec,
    evaluate,
    load_annotations,
    score_batch,
    split,
    train_baseline,
)
from .geolocate import GeoResolution, Gazetteer, load_default_gazetteer, load_gazetteer, resolve
from .ingest import (
    DEFAULT_KEYWORDS,
    DEFAULT_STOPPHRASES,
    FilterReport,
    RawPost,
    dedupe,
    exclude_irrelevant,
    exclude_profile_only,
    keyword_filter,
    read_jsonl,
    run_filter_chain,
)
from .policyindex import NemComponents, PolicyProfile, RpsInput, load_profiles, nem_score, rps_score
from .stats import (
    AnovaResult,
    CollinearityError,
    DataMatrix,
    RegressionResult,
    bartlett,
    describe,
    oneway_anova,
    ols,
    vif,
)
from .textprep import NormalizedText, TextNormalizer, normalize

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
