"""Multi-scale chain-of-thought graph prompt tuning (MSGCOT).

A frozen pre-trained graph encoder is adapted to few-shot node and graph
classification by training only two lightweight pieces: a conditional network
producing per-node feature prompts, and a low-rank coarsening network whose
hierarchy of coarse representations drives a coarse-to-fine chain of prompt
refinements.
"""

from .config import DATASET_PRESETS, ExperimentConfig, make_config
from .data import (
    Graph,
    GraphCollection,
    NormalizedAdjacency,
    TaskSplit,
    load_citation_dataset,
    load_tu_dataset,
    normalize_adjacency,
    sample_task,
)
from .encoder import EncoderParams, gcn_forward, grad_check, init_encoder, mean_readout
from .experiments import (
    ResultsTable,
    count_trainable_params,
    run_ablation,
    run_experiment,
    run_sweep,
    time_tuning_epochs,
)
from .partition import PartitionPool, build_partition_pool, coarse_schedule, heavy_edge_matching
from .pretrain import (
    EncoderCheckpoint,
    PretrainConfig,
    load_checkpoint,
    lp_loss,
    pretrain,
    sample_lp_batch,
    save_checkpoint,
)
from .prompting import (
    ChainTrace,
    CoarsenNetParams,
    CondNetParams,
    PromptModel,
    ThoughtPool,
    TuneSettings,
    Variant,
    backtrack_prompt_step,
    build_thought_pool,
    coarsen_step,
    compute_prototypes,
    condnet_forward,
    downstream_loss,
    load_prompt_model,
    pool_from_partitions,
    predict,
    prompt_tune,
    prompted_encode,
    reconstruction_loss,
    run_prompt_chain,
    save_prompt_model,
    total_loss,
)
from .reporting import emit_report, load_report
from .synthetic import synthetic_citation_graph, synthetic_graph_collection

__version__ = "0.1.0"
