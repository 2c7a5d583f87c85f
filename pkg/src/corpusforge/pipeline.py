"""Pipeline orchestration: shard discovery, per-shard jobs for
annotate/dedup/filter/stats, and model training entry points.

Every command is restartable per shard: outputs that already exist are
skipped unless force is set. With a fixed config and seed the whole
output tree is bit-reproducible (gzip mtime is pinned to 0)."""

from __future__ import annotations

import glob
import json
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, fields

from . import annotate as annotate_mod
from . import dedup as dedup_mod
from .errors import ConfigError, DataError
from .filtering import Ruleset, evaluate, load_ruleset
from .kneser_ney import (
    calibrate_cutoffs,
    kn_from_payload,
    kn_payload,
    perplexity,
    train_kn_lm,
)
from .mlmodels import (
    classifier_from_payload,
    classifier_payload,
    hashed_lm_from_payload,
    hashed_lm_payload,
    load_model,
    save_model,
    train_classifier,
    train_hashed_lm,
    training_accuracy,
)
from .records import (
    DEFAULT_SIDECAR_EXT,
    Document,
    ShardAddress,
    document_id,
    iter_jsonl_gz,
    parse_shard_path,
    read_documents,
    read_signal_records,
    shard_path,
    write_jsonl_gz,
)
from .textnorm import normalize

ENV_PREFIX = "CORPUSFORGE_"


@dataclass
class PipelineConfig:
    input_root: str = "."
    output_root: str = "out"
    snapshots: list[str] = field(default_factory=list)  # newest -> oldest
    languages: list[str] = field(default_factory=lambda: ["en"])
    workers: int = 1
    seed: int = 0
    signals: list[str] = field(default_factory=lambda: list(annotate_mod.DEFAULT_SIGNALS))
    ruleset: str = ""
    models: dict = field(default_factory=dict)
    bloom_capacity: int = 100_000
    bloom_error_rate: float = 0.01
    jaccard: float | None = None
    bands: int = dedup_mod.DEFAULT_BANDS
    rows: int = dedup_mod.DEFAULT_ROWS
    sidecar_ext: str = DEFAULT_SIDECAR_EXT
    error_rate_threshold: float = 0.01
    apply_dedup: bool = True
    force: bool = False
    stopword_dir: str = ""
    ldnoobw_dir: str = ""
    ut1_dir: str = ""

    @classmethod
    def load(cls, path: str | None = None, overrides: dict | None = None) -> "PipelineConfig":
        values: dict = {}
        if path:
            try:
                with open(path, encoding="utf-8") as fh:
                    values.update(json.load(fh))
            except (OSError, json.JSONDecodeError) as exc:
                raise ConfigError(f"cannot read config {path}: {exc}") from exc
        known = {f.name: f.type for f in fields(cls)}
        for key in list(values):
            if key not in known:
                raise ConfigError(f"unknown config key {key!r}")
        # environment overrides, e.g. CORPUSFORGE_WORKERS=4
        for f in fields(cls):
            env = os.environ.get(ENV_PREFIX + f.name.upper())
            if env is None:
                continue
            values[f.name] = _parse_env(f.name, env)
        if overrides:
            values.update({k: v for k, v in overrides.items() if v is not None})
        cfg = cls(**values)
        cfg.validate()
        return cfg

    def validate(self) -> None:
        if self.workers < 1:
            raise ConfigError("workers must be >= 1")
        if self.snapshots and self.snapshots != sorted(self.snapshots, reverse=True):
            raise ConfigError(
                "snapshots must be ordered newest to oldest: "
                + ", ".join(self.snapshots)
            )
        if self.bands * self.rows > dedup_mod.NUM_PERMUTATIONS:
            raise ConfigError("bands*rows exceeds the number of minhash components")


def _parse_env(name: str, raw: str):
    if name in ("snapshots", "languages", "signals"):
        return [x for x in raw.split(",") if x]
    if name in ("workers", "seed", "bloom_capacity", "bands", "rows"):
        return int(raw)
    if name in ("bloom_error_rate", "jaccard", "error_rate_threshold"):
        return float(raw)
    if name in ("apply_dedup", "force"):
        return raw.lower() in ("1", "true", "yes")
    return raw


# ---------------------------------------------------------------------------
# Shard discovery


def discover_document_shards(cfg: PipelineConfig) -> list[str]:
    """Document shard paths under input_root, restricted to the
    configured snapshots/languages, in (config snapshot order, shard id,
    language, bucket) order."""
    pattern = os.path.join(cfg.input_root, "documents", "*", "*", "*.json.gz")
    found = []
    for path in glob.glob(pattern):
        rel = os.path.relpath(path, cfg.input_root)
        try:
            addr, _ = parse_shard_path(rel)
        except (ValueError, IndexError):
            continue
        if cfg.snapshots and addr.snapshot_id not in cfg.snapshots:
            continue
        if cfg.languages and addr.language not in cfg.languages:
            continue
        found.append((addr, path))
    snap_order = {s: i for i, s in enumerate(cfg.snapshots)}
    found.sort(
        key=lambda item: (
            snap_order.get(item[0].snapshot_id, len(snap_order)),
            item[0].snapshot_id,
            item[0].shard_id,
            item[0].language,
            item[0].bucket,
        )
    )
    return [path for _, path in found]


def _read_shard_documents(cfg: PipelineConfig, path: str) -> list[Document]:
    docs, errors = read_documents(path)
    total = len(docs) + len(errors)
    for err in errors:
        print(f"warning: {path}: {err}")
    if total and len(errors) / total > cfg.error_rate_threshold:
        raise DataError(
            f"{path}: {len(errors)}/{total} bad records exceeds the "
            f"{cfg.error_rate_threshold:.0%} threshold"
        )
    return docs


def _output_exists(path: str, force: bool) -> bool:
    return not force and os.path.exists(path) and os.path.getsize(path) > 0


def _run_shard_jobs(cfg: PipelineConfig, jobs, worker) -> list:
    if cfg.workers > 1 and len(jobs) > 1:
        with ThreadPoolExecutor(max_workers=cfg.workers) as pool:
            return list(pool.map(worker, jobs))
    return [worker(job) for job in jobs]


def load_resources(cfg: PipelineConfig) -> annotate_mod.SignalResources:
    res = annotate_mod.SignalResources.load_default(
        languages=tuple(cfg.languages),
        stopword_paths=(
            {
                lang: os.path.join(cfg.stopword_dir, f"{lang}.txt")
                for lang in cfg.languages
            }
            if cfg.stopword_dir
            else None
        ),
        ldnoobw_dir=cfg.ldnoobw_dir or None,
        ut1_dir=cfg.ut1_dir or None,
    )
    models = cfg.models or {}
    for key, path in models.get("classifiers", {}).items():
        _, payload, digest = load_model(path, "classifier")
        res.classifiers[key] = classifier_from_payload(payload)
        res.provenance = f"{res.provenance}+{key}:{digest}"
    for key, pair in models.get("importance", {}).items():
        _, target_payload, tdigest = load_model(pair["target"], "hashed_lm")
        _, source_payload, sdigest = load_model(pair["source"], "hashed_lm")
        res.importance_models[key] = (
            hashed_lm_from_payload(target_payload),
            hashed_lm_from_payload(source_payload),
        )
        res.provenance = f"{res.provenance}+{key}:{tdigest}/{sdigest}"
    if models.get("kn_lm"):
        _, payload, digest = load_model(models["kn_lm"], "kneser_ney")
        res.kn_lm = kn_from_payload(payload)
        res.provenance = f"{res.provenance}+kn:{digest}"
    # fail at startup, not per document, when a requested ML signal has
    # no model behind it
    requested = set(annotate_mod.resolve_signal_names(cfg.signals))
    for name, key in annotate_mod.CLASSIFIER_SIGNALS.items():
        if name in requested and key not in res.classifiers:
            raise ConfigError(f"signal {name} requested but no classifier model configured")
    for name, key in annotate_mod.IMPORTANCE_SIGNALS.items():
        if name in requested and key not in res.importance_models:
            raise ConfigError(f"signal {name} requested but no importance model pair configured")
    return res


# ---------------------------------------------------------------------------
# annotate


def cmd_annotate(cfg: PipelineConfig) -> dict:
    res = load_resources(cfg)
    shards = discover_document_shards(cfg)
    if not shards:
        print("no document shards found")

    def job(path: str) -> tuple[str, int]:
        rel = os.path.relpath(path, cfg.input_root)
        addr, _ = parse_shard_path(rel)
        out_path = os.path.join(
            cfg.output_root, shard_path(addr, "quality_signals", cfg.sidecar_ext)
        )
        if _output_exists(out_path, cfg.force):
            return rel, -1
        docs = _read_shard_documents(cfg, path)
        lines = (
            annotate_mod.compute_signals(
                doc, res, names=cfg.signals, ordinal=i, snapshot_id=addr.snapshot_id
            ).to_json()
            for i, doc in enumerate(docs)
        )
        count = write_jsonl_gz(out_path, lines)
        return rel, count

    results = _run_shard_jobs(cfg, shards, job)
    written = sum(1 for _, c in results if c >= 0)
    skipped = sum(1 for _, c in results if c < 0)
    print(f"annotate: {written} shard(s) written, {skipped} skipped")
    return {"shards": len(results), "written": written, "skipped": skipped}


# ---------------------------------------------------------------------------
# dedup


def _iter_corpus(cfg: PipelineConfig):
    """(shard_rel, addr, docs) in the canonical newest-to-oldest order."""
    for path in discover_document_shards(cfg):
        rel = os.path.relpath(path, cfg.input_root)
        addr, _ = parse_shard_path(rel)
        yield rel, addr, _read_shard_documents(cfg, path)


def cmd_dedup(cfg: PipelineConfig, mode: str) -> dict:
    if mode == "exact":
        return _dedup_exact(cfg)
    if mode == "fuzzy":
        return _dedup_fuzzy(cfg)
    raise ConfigError(f"unknown dedup mode {mode!r}")


def _dedup_exact(cfg: PipelineConfig) -> dict:
    bloom = dedup_mod.BloomFilter(cfg.bloom_capacity, cfg.bloom_error_rate)
    per_snapshot: dict[str, list[int]] = {}
    shard_records: dict[str, tuple[ShardAddress, list]] = {}
    snapshot_of: dict[str, str] = {}

    def entries():
        for rel, addr, docs in _iter_corpus(cfg):
            shard_records.setdefault(rel, (addr, []))
            snapshot_of[rel] = addr.snapshot_id
            stats = per_snapshot.setdefault(addr.snapshot_id, [0, 0])
            for i, doc in enumerate(docs):
                stats[0] += 1
                doc_id, _ = document_id(doc, i)
                yield doc_id, rel, doc.digest

    for record in dedup_mod.exact_dedup_pass(entries(), bloom):
        per_snapshot[snapshot_of[record.shard]][1] += 1
        shard_records[record.shard][1].append(record)

    total_docs = total_dups = 0
    for rel, (addr, records) in sorted(shard_records.items()):
        out_path = os.path.join(
            cfg.output_root, shard_path(addr, "duplicates", cfg.sidecar_ext)
        )
        write_jsonl_gz(out_path, (r.to_json() for r in records))
        total_dups += len(records)
    for snapshot in cfg.snapshots or sorted(per_snapshot, reverse=True):
        docs, dups = per_snapshot.get(snapshot, (0, 0))
        frac = dups / docs if docs else 0.0
        total_docs += docs
        print(f"dedup[exact] {snapshot}: {docs} docs, {dups} duplicates ({frac:.2%})")
    print(f"dedup[exact] total: {total_docs} docs, {total_dups} duplicates; "
          f"bloom fill {bloom.fill_ratio():.3f}")
    return {"mode": "exact", "documents": total_docs, "duplicates": total_dups}


def _dedup_fuzzy(cfg: PipelineConfig) -> dict:
    if cfg.jaccard is not None:
        bands, rows = dedup_mod.pick_banding(cfg.jaccard)
    else:
        bands, rows = cfg.bands, cfg.rows

    order: dict[str, int] = {}
    shards_by_id: dict[str, str] = {}
    addr_by_rel: dict[str, ShardAddress] = {}
    signatures = []
    for rel, addr, docs in _iter_corpus(cfg):
        addr_by_rel[rel] = addr
        sig_lines = []
        for i, doc in enumerate(docs):
            doc_id, _ = document_id(doc, i)
            words = normalize(doc.raw_content).split()
            sig = dedup_mod.minhash_for_words(words)
            order[doc_id] = len(order)
            shards_by_id[doc_id] = rel
            signatures.append((doc_id, sig))
            sig_lines.append(json.dumps(
                {"doc_id": doc_id, "signature": [int(x) for x in sig],
                 "bands": bands, "rows": rows},
                separators=(",", ":"),
            ))
        out_path = os.path.join(
            cfg.output_root, shard_path(addr, "minhash", cfg.sidecar_ext)
        )
        if not _output_exists(out_path, cfg.force):
            write_jsonl_gz(out_path, sig_lines)

    pairs = dedup_mod.lsh_candidates(signatures, bands, rows)
    if cfg.jaccard is not None:
        sig_by_id = dict(signatures)
        pairs = {
            (a, b)
            for a, b in pairs
            if dedup_mod.estimate_jaccard(sig_by_id[a], sig_by_id[b]) >= cfg.jaccard
        }
    records = dedup_mod.cluster_and_select(pairs, order, shards_by_id)
    by_shard: dict[str, list] = {rel: [] for rel in addr_by_rel}
    for record in records:
        by_shard[record.shard].append(record)
    for rel, recs in sorted(by_shard.items()):
        out_path = os.path.join(
            cfg.output_root, shard_path(addr_by_rel[rel], "duplicates", cfg.sidecar_ext)
        )
        write_jsonl_gz(out_path, (r.to_json() for r in recs))
    frac = len(records) / len(order) if order else 0.0
    print(f"dedup[fuzzy] bands={bands} rows={rows}: {len(order)} docs, "
          f"{len(pairs)} candidate pairs, {len(records)} duplicates ({frac:.2%})")
    return {
        "mode": "fuzzy",
        "documents": len(order),
        "candidates": len(pairs),
        "duplicates": len(records),
        "bands": bands,
        "rows": rows,
    }


def _load_duplicate_ids(cfg: PipelineConfig, addr: ShardAddress, root: str) -> set[str]:
    path = os.path.join(root, shard_path(addr, "duplicates", cfg.sidecar_ext))
    if not os.path.exists(path):
        return set()
    ids = set()
    for _num, line in iter_jsonl_gz(path):
        ids.add(json.loads(line)["doc_id"])
    return ids


# ---------------------------------------------------------------------------
# filter


def cmd_filter(cfg: PipelineConfig) -> dict:
    if not cfg.ruleset:
        raise ConfigError("filter requires a ruleset path or preset name")
    rs: Ruleset = load_ruleset(cfg.ruleset)
    shards = discover_document_shards(cfg)
    totals = {"kept": 0, "rewritten": 0, "dropped": 0, "duplicates": 0}

    def job(path: str):
        rel = os.path.relpath(path, cfg.input_root)
        addr, _ = parse_shard_path(rel)
        out_path = os.path.join(cfg.output_root, shard_path(addr, "documents"))
        audit_path = out_path.replace(".json.gz", ".audit.jsonl.gz")
        if _output_exists(out_path, cfg.force):
            return None
        docs = _read_shard_documents(cfg, path)
        sig_path = os.path.join(
            cfg.input_root, shard_path(addr, "quality_signals", cfg.sidecar_ext)
        )
        if rs.doc_rules or rs.line_rules:
            if not os.path.exists(sig_path):
                raise ConfigError(f"missing signals sidecar for shard {rel}: {sig_path}")
            sig_records, sig_errors = read_signal_records(sig_path)
            for err in sig_errors:
                print(f"warning: {sig_path}: {err}")
            by_id = {s.id: s for s in sig_records}
        else:
            by_id = {}
        duplicates = (
            _load_duplicate_ids(cfg, addr, cfg.input_root) if cfg.apply_dedup else set()
        )
        out_lines, audit_lines = [], []
        counts = {"kept": 0, "rewritten": 0, "dropped": 0, "duplicates": 0}
        for i, doc in enumerate(docs):
            doc_id, _ = document_id(doc, i)
            if doc_id in duplicates:
                counts["duplicates"] += 1
                audit_lines.append(json.dumps(
                    {"doc_id": doc_id, "verdict": "drop",
                     "fired_rules": [["duplicate", 1.0]]},
                    separators=(",", ":"),
                ))
                continue
            if rs.doc_rules or rs.line_rules:
                signals = by_id.get(doc_id)
                if signals is None:
                    raise ConfigError(
                        f"no signal record for document {doc_id} in shard {rel}"
                    )
                decision = evaluate(doc, signals, rs)
            else:
                decision = None
            if decision is None or decision.verdict == "keep":
                counts["kept"] += 1
                out_lines.append(doc.to_json())
                continue
            audit_lines.append(json.dumps(
                {"doc_id": doc_id, "verdict": decision.verdict,
                 "fired_rules": [[r, v] for r, v in decision.fired_rules]},
                separators=(",", ":"),
            ))
            if decision.verdict == "rewrite":
                counts["rewritten"] += 1
                out_lines.append(decision.rewritten.to_json())
            else:
                counts["dropped"] += 1
        write_jsonl_gz(out_path, out_lines)
        write_jsonl_gz(audit_path, audit_lines)
        return counts

    for counts in _run_shard_jobs(cfg, shards, job):
        if counts:
            for key in totals:
                totals[key] += counts[key]
    print(
        f"filter[{rs.name}]: kept {totals['kept']}, rewritten {totals['rewritten']}, "
        f"dropped {totals['dropped']}, duplicates {totals['duplicates']}"
    )
    return totals


# ---------------------------------------------------------------------------
# stats


def cmd_stats(cfg: PipelineConfig, as_json: bool = False) -> dict:
    """Per-language document/word counts in the partition-column layout
    (all / tail / head+middle / head+middle deduped). Word counts are a
    proxy for BPE token counts. as_json switches the rendering from the
    human table to one machine-readable JSON object."""
    per_lang: dict[str, dict[str, list[int]]] = {}

    def bucket_cols(bucket: str) -> list[str]:
        cols = ["all"]
        cols.append("tail" if bucket == "tail" else "head_middle")
        return cols

    for rel, addr, docs in _iter_corpus(cfg):
        duplicates = _load_duplicate_ids(cfg, addr, cfg.input_root)
        lang = per_lang.setdefault(
            addr.language,
            {c: [0, 0] for c in ("all", "tail", "head_middle", "head_middle_dedupe")},
        )
        for i, doc in enumerate(docs):
            words = len(doc.raw_content.split())
            for col in bucket_cols(doc.bucket):
                lang[col][0] += 1
                lang[col][1] += words
            if doc.bucket != "tail":
                doc_id, _ = document_id(doc, i)
                if doc_id not in duplicates:
                    lang["head_middle_dedupe"][0] += 1
                    lang["head_middle_dedupe"][1] += words

    columns = ("all", "tail", "head_middle", "head_middle_dedupe")
    total = {c: [0, 0] for c in columns}
    for lang in per_lang.values():
        for c in columns:
            total[c][0] += lang[c][0]
            total[c][1] += lang[c][1]
    table = {lang: per_lang[lang] for lang in sorted(per_lang)}
    table["Total"] = total
    result = {
        "columns": list(columns),
        "note": "word counts proxy for BPE token counts",
        "rows": {k: {c: v[:] for c, v in row.items()} for k, row in table.items()},
    }
    if as_json:
        print(json.dumps(result, separators=(",", ":"), sort_keys=True))
        return result

    header = f"{'lang':>6} " + " ".join(f"{c:>24}" for c in columns)
    print(header)
    print("note: word counts proxy for BPE token counts")
    for lang, row in table.items():
        cells = " ".join(
            f"{row[c][0]:>10} {row[c][1]:>13}" for c in columns
        )
        print(f"{lang:>6} {cells}")
    return result


# ---------------------------------------------------------------------------
# train


def _iter_training_texts(path: str):
    """Accepts JSONL(.gz) with either {"text": ...} or full document
    records; yields normalized word lists."""
    for _num, line in iter_jsonl_gz(path):
        record = json.loads(line)
        text = record.get("text", record.get("raw_content"))
        if text is None:
            raise DataError(f"{path}: record without text/raw_content field")
        yield normalize(text).split()


def cmd_train(cfg: PipelineConfig, kind: str, args: dict) -> dict:
    out_path = args.get("output")
    if not out_path:
        raise ConfigError("train requires an output model path")

    if kind == "classifier":
        pos = list(_iter_training_texts(_require(args, "positive")))
        neg = list(_iter_training_texts(_require(args, "negative")))
        clf = train_classifier(
            pos, neg,
            epochs=args.get("epochs", 20),
            lr=args.get("lr", 0.5),
            seed=cfg.seed,
        )
        digest = save_model(out_path, "classifier", classifier_payload(clf))
        acc = training_accuracy(clf, pos, neg)
        print(f"classifier saved to {out_path} (hash {digest}); "
              f"training accuracy {acc:.4f}")
        return {"kind": kind, "hash": digest, "accuracy": acc}

    if kind == "hashed_lm":
        corpus = list(_iter_training_texts(_require(args, "corpus")))
        lm = train_hashed_lm(corpus, buckets=args.get("buckets", 10_000))
        digest = save_model(out_path, "hashed_lm", hashed_lm_payload(lm))
        print(f"hashed LM saved to {out_path} (hash {digest}); "
              f"{lm.total} features over {lm.bucket_count} buckets")
        return {"kind": kind, "hash": digest, "total": lm.total}

    if kind == "kn_lm":
        tokens: list[str] = []
        for words in _iter_training_texts(_require(args, "corpus")):
            tokens.extend(words)
        lm = train_kn_lm(tokens, order=args.get("order", 5))
        digest = save_model(out_path, "kneser_ney", kn_payload(lm))
        ppl = perplexity(tokens, lm)
        print(f"KN LM saved to {out_path} (hash {digest}); "
              f"training perplexity {ppl:.2f}")
        return {"kind": kind, "hash": digest, "train_perplexity": ppl}

    if kind == "calibrate_buckets":
        _, payload, _ = load_model(_require(args, "kn_model"), "kneser_ney")
        lm = kn_from_payload(payload)
        ppls = [perplexity(words, lm) for words in
                _iter_training_texts(_require(args, "corpus"))]
        cutoffs = calibrate_cutoffs(ppls)
        digest = save_model(out_path, "bucket_cutoffs", {
            "head_max": cutoffs.head_max, "middle_max": cutoffs.middle_max,
        })
        print(f"bucket cutoffs saved to {out_path} (hash {digest}): "
              f"head<={cutoffs.head_max:.3f}, middle<={cutoffs.middle_max:.3f}")
        return {"kind": kind, "hash": digest,
                "head_max": cutoffs.head_max, "middle_max": cutoffs.middle_max}

    raise ConfigError(f"unknown training kind {kind!r}")


def _require(args: dict, key: str) -> str:
    value = args.get(key)
    if not value:
        raise ConfigError(f"train is missing required argument --{key.replace('_', '-')}")
    return value
