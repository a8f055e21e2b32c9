"""Stage functions: every stage reads its inputs from disk and writes its artifact.

Directory layout under the run directory::

    dataset.csv, dataset.manifest.json
    split.json
    encoded/<enc>_{train,test}.csv, encoded/<enc>.encoder.bin
    models/<enc>__<det>.bin
    scores/<enc>__<det>.csv
    reports/<enc>__<det>.{json,csv,txt}
"""
from __future__ import annotations

import json
import logging
import os
import platform
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np
import pandas as pd

from . import __version__, persist
from .config import DETECTORS, ENCODINGS, ConfigError, PipelineConfig
from .detect import DETECTORS as DETECTOR_CLASSES
from .encode import ENCODERS, EmbeddingEncoder, EncodedMatrix
from .evaluation import EvalReport, SplitSpec, split, sweep
from .rng import derive_seed
from .vcgen import (
    DEFAULT_CATALOG, DEFAULT_COMPLEXITY, AnomalyConfig, IssueCatalog, SynthSpec, acquire_base,
    generate_dataset, read_dataset, write_dataset,
)

log = logging.getLogger(__name__)
WORKERS_ENV = "AUDITBENCH_WORKERS"


class StageError(RuntimeError):
    def __init__(self, stage: str, cause: BaseException):
        super().__init__(f"stage {stage!r} failed: {cause}")
        self.stage = stage
        self.cause = cause


def _versions() -> dict:
    import scipy
    import sklearn
    return {"auditbench": __version__, "numpy": np.__version__, "pandas": pd.__version__,
            "scipy": scipy.__version__, "scikit-learn": sklearn.__version__,
            "python": platform.python_version()}


def write_manifest(path, stage: str, seed, inputs=(), outputs=(), **extra) -> dict:
    info = {
        "stage": stage,
        "seed": seed,
        "versions": _versions(),
        "inputs": {str(p): persist.file_digest(p) for p in inputs},
        "outputs": {str(p): persist.file_digest(p) for p in outputs},
        **extra,
    }
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(info, fh, indent=2, sort_keys=True, default=str)
        fh.write("\n")
    return info


# ------------------------------------------------------------------ generate

def generation_inputs(gen: dict, seed: int):
    """Translate a ``generate`` config block into generator arguments."""
    catalog = IssueCatalog.from_records(gen["catalog"]) if "catalog" in gen else DEFAULT_CATALOG
    complexity = DEFAULT_COMPLEXITY
    if "complexity" in gen or "default_complexity" in gen:
        complexity = complexity.with_overrides(gen.get("complexity", {}), gen.get("default_complexity"))
    anomaly = AnomalyConfig.from_dict({**gen.get("anomaly", {}), "seed": seed})
    if gen.get("base_csv"):
        source = gen["base_csv"]
    else:
        source = SynthSpec(int(gen.get("n_rows", 10000)), seed=seed)
    return source, catalog, complexity, anomaly


def stage_generate(gen: dict, seed: int, out_path) -> dict:
    out_path = Path(out_path)
    source, catalog, complexity, anomaly = generation_inputs(gen, seed)
    base = acquire_base(source, complexity)
    frame, manifest = generate_dataset(base, catalog, complexity, anomaly)
    out_path.parent.mkdir(parents=True, exist_ok=True)
    write_dataset(frame, out_path)
    manifest["versions"] = _versions()
    manifest["outputs"] = {str(out_path): persist.file_digest(out_path)}
    with open(out_path.with_suffix(".manifest.json"), "w", encoding="utf-8") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return manifest


# --------------------------------------------------------------------- split

def stage_split(dataset_path, label_column: str, spec: SplitSpec, out_path) -> dict:
    labels = pd.read_csv(dataset_path, usecols=[label_column])[label_column].to_numpy()
    s = split(labels, spec)
    record = {"train": s.train.tolist(), "test": s.test.tolist(), "metadata": s.metadata,
              "label_column": label_column,
              "dataset": os.path.relpath(Path(dataset_path).resolve(), Path(out_path).resolve().parent),
              "dataset_sha256": persist.file_digest(dataset_path)}
    with open(out_path, "w", encoding="utf-8") as fh:
        json.dump(record, fh)
    return record


def _load_split(path) -> dict:
    with open(path, encoding="utf-8") as fh:
        return json.load(fh)


# -------------------------------------------------------------------- encode

def build_encoder(encoding: str, kinds: dict, params: dict, seed: int, label_column: str):
    params = dict(params)
    if encoding == "embedding":
        params.setdefault("seed", seed)
    return ENCODERS[encoding](kinds=kinds, exclude=(label_column,), **params)


def stage_encode(dataset_path, split_path, encoding: str, kinds: dict, params: dict, seed: int,
                 out_dir) -> dict[str, Path]:
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    sp = _load_split(split_path)
    label_column = sp["label_column"]
    frame = read_dataset(dataset_path)
    train, test = frame.iloc[sp["train"]], frame.iloc[sp["test"]]
    enc = build_encoder(encoding, kinds, params, seed, label_column).fit(train)
    paths = {
        "train": out_dir / f"{encoding}_train.csv",
        "test": out_dir / f"{encoding}_test.csv",
        "encoder": out_dir / f"{encoding}.encoder.bin",
    }
    enc.encode(train, train[label_column].to_numpy()).to_csv(paths["train"])
    enc.encode(test, test[label_column].to_numpy()).to_csv(paths["test"])
    if isinstance(enc, EmbeddingEncoder):
        prov = [(c.name, "index", str(c.cardinality)) for c in enc.categorical_] + enc._numeric_provenance()
        for part, rows in (("train", train), ("test", test)):
            key = f"index_{part}"
            paths[key] = out_dir / f"{encoding}_index_{part}.csv"
            EncodedMatrix(enc.index_matrix(rows), prov, rows[label_column].to_numpy()).to_csv(paths[key])
    persist.dump(enc, paths["encoder"], schema_sha256=_schema_hash(enc))
    outputs = list(paths.values())
    write_manifest(out_dir / f"{encoding}.manifest.json", "encode", seed,
                   inputs=[dataset_path, split_path], outputs=outputs, encoding=encoding, params=params)
    return paths


def _schema_hash(enc) -> str:
    import hashlib
    blob = json.dumps([c.to_dict() for c in enc.schema_], sort_keys=True).encode("utf-8")
    return hashlib.sha256(blob).hexdigest()


# --------------------------------------------------------------- train/score

def build_detector(name: str, params: dict, seed: int, provenance, zscore_column: str = "repair_cost"):
    params = dict(params)
    cls = DETECTOR_CLASSES[name]
    if "random_state" in cls().get_params():
        params.setdefault("random_state", seed)
    if name == "ae":
        index_cols = [p for p in provenance if p[1] == "index"]
        if index_cols:
            params.setdefault("cardinalities", [int(p[2]) for p in index_cols])
    if name == "zscore" and "column" not in params:
        matches = [j for j, p in enumerate(provenance) if p[0] == zscore_column]
        if not matches:
            raise ConfigError(f"z-score column {zscore_column!r} is not in the encoded matrix")
        params["column"] = matches[0]
    return cls(**params)


def stage_train(encoded_path, detector: str, params: dict, seed: int, model_path,
                zscore_column: str = "repair_cost"):
    m = EncodedMatrix.from_csv(encoded_path)
    det = build_detector(detector, params, seed, m.provenance, zscore_column).fit(m.values)
    Path(model_path).parent.mkdir(parents=True, exist_ok=True)
    persist.dump(det, model_path, detector=detector, provenance=[list(p) for p in m.provenance])
    return det


def stage_score(model_path, encoded_path, scores_path) -> np.ndarray:
    det = persist.load(model_path)
    m = EncodedMatrix.from_csv(encoded_path)
    scores = det.anomaly_score(m.values)
    Path(scores_path).parent.mkdir(parents=True, exist_ok=True)
    out = pd.DataFrame({"score": scores})
    if m.labels is not None:
        out["label"] = m.labels
    out.to_csv(scores_path, index=False, float_format="%.17g", lineterminator="\n")
    return scores


def stage_sweep(scores_path, tau_grid, prefix, **meta) -> EvalReport:
    frame = pd.read_csv(scores_path)
    report = sweep(frame["score"].to_numpy(), frame["label"].to_numpy(), tau_grid, **meta)
    prefix = Path(prefix)
    prefix.parent.mkdir(parents=True, exist_ok=True)
    report.to_json(prefix.with_suffix(".json"))
    report.to_csv(prefix.with_suffix(".csv"))
    report.to_plot_text(prefix.with_suffix(".txt"))
    return report


# ------------------------------------------------------------------ pipeline

def _run_cell(args) -> dict:
    out, encoding, detector, cfg_dict, split_meta, enc_paths = args
    cfg = PipelineConfig.from_dict(cfg_dict)
    out = Path(out)
    name = f"{encoding}__{detector}"
    use_index = encoding == "embedding" and detector == "ae"
    train_csv = enc_paths["index_train" if use_index else "train"]
    test_csv = enc_paths["index_test" if use_index else "test"]
    model_path = out / "models" / f"{name}.bin"
    scores_path = out / "scores" / f"{name}.csv"
    seed = derive_seed(cfg.seed, "detect", detector)
    params = cfg.detector_params.get(detector, {}) if cfg.matrix else cfg.detector_params
    try:
        stage_train(train_csv, detector, params, seed, model_path, cfg.zscore_column)
    except ConfigError:
        raise
    except Exception as exc:
        raise StageError(f"train[{name}]", exc) from exc
    try:
        stage_score(model_path, test_csv, scores_path)
        report = stage_sweep(scores_path, cfg.tau_grid, out / "reports" / name,
                             split=split_meta, detector=detector, encoding=encoding)
    except Exception as exc:
        raise StageError(f"score[{name}]", exc) from exc
    write_manifest(out / "models" / f"{name}.manifest.json", "train+score", seed,
                   inputs=[train_csv, test_csv], outputs=[model_path, scores_path],
                   detector=detector, encoding=encoding, params=params)
    return report.to_dict()


def run_pipeline(cfg: PipelineConfig, out_dir) -> dict[str, EvalReport]:
    """Run generate/load -> split -> encode -> train -> score -> sweep.

    Returns reports keyed by ``"<encoding>__<detector>"``.
    """
    cfg.validate()
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    with open(out / "config.json", "w", encoding="utf-8") as fh:
        json.dump(cfg.to_dict(), fh, indent=2, sort_keys=True)

    if "generate" in cfg.dataset:
        dataset_path = out / "dataset.csv"
        gen = cfg.dataset["generate"]
        gen_seed = int(gen.get("seed", derive_seed(cfg.seed, "generate") % (2 ** 31)))
        try:
            stage_generate(gen, gen_seed, dataset_path)
        except Exception as exc:
            raise StageError("generate", exc) from exc
        label_column = "label"
    else:
        dataset_path = Path(cfg.dataset["csv"])
        if not dataset_path.exists():
            raise ConfigError(f"dataset {dataset_path} does not exist")
        label_column = cfg.dataset.get("label_column", "label")

    spec = SplitSpec(cfg.split.get("strategy", "stratified_70_30"),
                     int(cfg.split.get("seed", derive_seed(cfg.seed, "split"))))
    try:
        split_record = stage_split(dataset_path, label_column, spec, out / "split.json")
    except Exception as exc:
        raise StageError("split", exc) from exc

    encodings = ENCODINGS if cfg.matrix else (cfg.encoding,)
    detectors = DETECTORS if cfg.matrix else (cfg.detector,)
    enc_paths = {}
    for encoding in encodings:
        try:
            enc_paths[encoding] = stage_encode(
                dataset_path, out / "split.json", encoding, cfg.column_kinds,
                cfg.encoder_params.get(encoding, {}) if cfg.matrix else cfg.encoder_params,
                derive_seed(cfg.seed, "encode", encoding), out / "encoded")
        except Exception as exc:
            raise StageError(f"encode[{encoding}]", exc) from exc

    cells = [(str(out), e, d, cfg.to_dict(), split_record["metadata"], enc_paths[e])
             for e in encodings for d in detectors]
    workers = int(os.environ.get(WORKERS_ENV, "1") or 1)
    if workers > 1 and len(cells) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_run_cell, cells))
    else:
        results = [_run_cell(c) for c in cells]
    reports = {f"{c[1]}__{c[2]}": EvalReport.from_dict(r) for c, r in zip(cells, results)}
    summary = {k: {"auc": r.auc} for k, r in reports.items()}
    with open(out / "summary.json", "w", encoding="utf-8") as fh:
        json.dump(summary, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return reports
