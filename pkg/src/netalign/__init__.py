"""Unsupervised network alignment.

Pipeline: centrality-binned one-hot node features, a shared GIN encoder
trained on a multi-hop adjacency reconstruction loss, layer-summed embedding
similarity, and gradual matching amplified by matched-neighbor counts.
"""

from .align import (
    AlignConfig,
    GradualAlignResult,
    acn_counts,
    acn_similarity,
    combined_similarity,
    gradual_align,
    greedy_select,
    jaccard_similarity,
)
from .centrality import (
    MEASURES,
    CentralityParams,
    CentralityVector,
    centrality_histogram,
    compute_centrality,
    kl_divergence,
    select_centrality,
    selection_score,
    selection_score_core,
)
from .embedding import (
    GnnParams,
    TrainConfig,
    embedding_similarity,
    gin_forward,
    init_gnn_params,
    loss_gradient,
    reconstruction_loss,
    train_gnn,
)
from .features import AugmentedFeatures, augment_features
from .graphs import (
    Graph,
    GraphFormatError,
    NodeMapping,
    load_edgelist,
    load_feature_matrix,
    load_mapping,
    normalized_adjacency_target,
    permute_graph,
    save_edgelist,
    save_feature_matrix,
    save_mapping,
)
from .harness import (
    ExperimentConfig,
    FilePairSpec,
    PipelineSettings,
    Report,
    SynthPairSpec,
    accuracy,
    bench_scaling,
    precision_at_q,
    run_experiment,
    run_pipeline,
)
from .synth import NoiseSpec, er_graph, noisy_copy

__version__ = "0.1.0"
