"""reviewscope: explainable detection of AI-generated peer reviews.

Pipeline: score a review on eight stylometric markers, classify the
marker vector with a cost-sensitive model, attribute the verdict with
exact Shapley values, corroborate it with labeled nearest-neighbor
evidence, and assemble everything into an editor report.
"""

from .classify import (
    TrainedModel,
    compute_class_weight,
    fit_gradient_boosting,
    fit_logistic_regression,
    fit_random_forest,
    load_model,
    predict,
    predict_proba,
    save_model,
)
from .corpus import (
    AI_GENERATED,
    HUMAN,
    Dataset,
    Review,
    class_counts,
    load_dataset_csv,
    parse_peerread_file,
    stratified_split,
    write_dataset_csv,
)
from .explain import (
    GlobalImportance,
    ShapExplanation,
    global_importance,
    linear_shap,
    shapley_bruteforce,
    top_contributors,
    tree_shap,
)
from .extraction import (
    LlmClientConfig,
    LlmExtractor,
    RuleBasedExtractor,
    build_extraction_prompt,
    extract_batch,
    parse_llm_scores,
)
from .lexicon import Lexicon, default_lexicon, load_lexicon
from .markers import MARKER_NAMES, MarkerVector, extract_rule_based, segment_sentences
from .report import (
    EditorReport,
    assess,
    confidence_level,
    generate_report,
    parse_report_json,
    render_json,
    render_text,
    severity,
)
from .retrieve import (
    BuiltinEncoder,
    EvidenceIndex,
    ExternalEncoder,
    build_index,
    encode,
    evaluate_retrieval,
    load_index,
    normalize,
    save_index,
    search,
    similarity,
)

__version__ = "0.1.0"
