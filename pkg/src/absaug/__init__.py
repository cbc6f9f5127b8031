"""Label-balanced LLM data augmentation for aspect-based sentiment analysis.

The pipeline loads ABSA datasets, oversamples minority labels, generates
candidate augmentations through a prompted LLM, scores them with a
sentiment-consistency reward and an LDA topic-relevance reward, selects DPO
preference pairs, and exports training artifacts with stable formats.
"""

from .augmenter import AugmentedCandidate, augment, build_prompt
from .balancer import balance, merge_augmented
from .corpus import Dataset, Instance, Polarity, label_counts, parse_jsonl, parse_semeval_xml
from .errors import AbsaugError, DataError, FitError, GatewayError, ParseError
from .evaluator import EvalReport, evaluate, predict_split
from .exporter import export_manifest, export_sft
from .llm_gateway import (
    UNPARSEABLE,
    GenRequest,
    GenResponse,
    LlmGateway,
    MockBackend,
    OpenAIBackend,
)
from .preference_builder import PreferencePair, Skip, build_pair, build_preference_dataset
from .reward import ScoredCandidate, ScoredRecord, score_pool
from .topic_model import GibbsLda, LdaModel, fit, infer, relevance

__version__ = "0.1.0"

__all__ = [
    "AbsaugError",
    "AugmentedCandidate",
    "Dataset",
    "DataError",
    "EvalReport",
    "FitError",
    "GatewayError",
    "GenRequest",
    "GenResponse",
    "GibbsLda",
    "Instance",
    "LdaModel",
    "LlmGateway",
    "MockBackend",
    "OpenAIBackend",
    "ParseError",
    "Polarity",
    "PreferencePair",
    "ScoredCandidate",
    "ScoredRecord",
    "Skip",
    "UNPARSEABLE",
    "augment",
    "balance",
    "build_pair",
    "build_preference_dataset",
    "build_prompt",
    "evaluate",
    "export_manifest",
    "export_sft",
    "fit",
    "infer",
    "label_counts",
    "merge_augmented",
    "parse_jsonl",
    "parse_semeval_xml",
    "predict_split",
    "relevance",
    "score_pool",
]
