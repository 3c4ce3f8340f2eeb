"""maskmatch: prompt both inputs and labels, predict by matching mask states.

A small numpy library for training and comparing four text-classification
paradigms (fine-tuning, prompt-tuning with virtual label embeddings,
semantic matching over label names, and mask matching) over one shared,
fully trainable transformer encoder, with its own reverse-mode gradient
engine, AdamW, and warmup/decay schedule.
"""

from . import numerics
from .data import (
    DatasetManifest,
    LoadedDataset,
    SyntheticSpec,
    generate_synthetic,
    load_dataset,
    load_manifest,
    subsample_low_resource,
    write_dataset,
)
from .encoder import (
    EncoderConfig,
    cls_state,
    forward,
    forward_batch,
    init_encoder_params,
    load_checkpoint,
    mask_state,
    pooled_state,
    save_checkpoint,
)
from .errors import ConfigError, ContractError, DataError, NumericError, SchemaError, TapeError
from .harness import (
    ComparisonTable,
    MetricsReport,
    TrainRunConfig,
    TrainedModel,
    compare,
    evaluate,
    load_model,
    save_model,
    sweep_templates,
    train,
)
from .metrics import accuracy, compute_metric, macro_f1, micro_f1
from .paradigms import (
    InputRepr,
    LabelBank,
    ParadigmKind,
    Prediction,
    input_repr,
    label_bank,
    loss,
    predict,
)
from .prompts import (
    LabelSet,
    PromptedExample,
    RawExample,
    TaskFamily,
    render_input,
    render_label,
    render_label_set,
)
from .tokenizer import TokenSequence, Vocab, build_vocab, decode, encode

__version__ = "0.1.0"
