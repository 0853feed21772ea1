from .base import (
    CapabilityError,
    ContinuationScore,
    ContinuationScorer,
    Embedder,
    EmbeddingDimensionError,
    GenerationRequest,
    GenerationResult,
    ParallelismGate,
    ProviderError,
    ProviderRejection,
    TextGenerator,
    TransportError,
    call_with_retries,
)
from .httpclient import HttpEmbedder, HttpTextProvider, ResponseCache
from .mocks import (
    ContentKeyScorer,
    FlakyGenerator,
    HashEmbedder,
    ScorelessGenerator,
    ScriptedGenerator,
    ScriptedScorer,
    fabrication_response,
)
from .templating import (
    TEMPLATE_NAMES,
    PromptTemplate,
    TemplateError,
    default_template_dir,
    load_templates,
    render,
)

__all__ = [
    "CapabilityError",
    "ContentKeyScorer",
    "ContinuationScore",
    "ContinuationScorer",
    "Embedder",
    "EmbeddingDimensionError",
    "FlakyGenerator",
    "GenerationRequest",
    "GenerationResult",
    "HashEmbedder",
    "HttpEmbedder",
    "HttpTextProvider",
    "ParallelismGate",
    "PromptTemplate",
    "ProviderError",
    "ProviderRejection",
    "ResponseCache",
    "ScorelessGenerator",
    "ScriptedGenerator",
    "ScriptedScorer",
    "TEMPLATE_NAMES",
    "TemplateError",
    "TextGenerator",
    "TransportError",
    "call_with_retries",
    "default_template_dir",
    "fabrication_response",
    "load_templates",
    "render",
]
