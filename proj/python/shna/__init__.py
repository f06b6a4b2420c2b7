"""Anchor link prediction across two attributed social networks."""

from ._shna import (
    AlignmentConfig,
    Dataset,
    DivergenceError,
    Error,
    ParseError,
    PartitionConfig,
    PipelineConfig,
    PipelineResult,
    StageError,
    SyntheticParams,
    UsageError,
    ValidationError,
    diagram_counts,
    generate,
    load_dataset,
    predictions,
    report,
    run_pipeline,
    write_artifacts,
)


def _set(obj, overrides):
    for key, value in overrides.items():
        if not hasattr(obj, key):
            raise UsageError(f"unknown setting {key!r}")
        setattr(obj, key, value)
    return obj


def synthetic(out_dir, **params):
    """Generate a planted dataset into out_dir. Keyword names follow SyntheticParams."""
    generate(_set(SyntheticParams(), params), str(out_dir))


def run(data_dir, out_dir=None, k=4, top_s=None, threads=1, partition=None, align=None):
    """Load data_dir, run every stage and return the report dict.

    partition and align are dicts of PartitionConfig / AlignmentConfig fields.
    Artifacts are written when out_dir is given.
    """
    cfg = PipelineConfig()
    cfg.partition = _set(cfg.partition, {"k": k, **(partition or {})})
    cfg.align = _set(cfg.align, align or {})
    cfg.top_s = k if top_s is None else top_s
    cfg.threads = threads
    data = load_dataset(str(data_dir))
    result = run_pipeline(cfg, data)
    if out_dir is not None:
        write_artifacts(result, data, cfg, str(out_dir))
    return report(result, cfg)
