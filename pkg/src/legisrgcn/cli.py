"""Command-line entry point wiring the pipeline into reproducible runs."""

from __future__ import annotations

import dataclasses
import datetime as dt
import hashlib
import json
import os
import sys
try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib
from pathlib import Path

import click
import numpy as np

from . import __version__
from .cachefile import read_cache, write_cache
from .corpus import (
    CorpusError,
    Split,
    filter_bills,
    load_corpus,
    time_split,
)
from .encoder import DocumentEncoder, EncoderConfig, HashingBackend
from .evalsuite import (
    BaselineResources,
    EvalError,
    run_ablation,
    run_baseline,
    similarity_analysis,
    export_similarity,
    project_embeddings,
    train_rollcall,
)
from .graph import NodeType, build_graph
from .heads import LossWeights
from .recordparse import DailyEdition, parse_editions
from .trainer import TrainConfig, cosponsorship_examples, evaluate, node_representations, train

EXIT_USAGE = 2
EXIT_DATA = 3
EXIT_INTERNAL = 4

ENV_PREFIX = "LEGISRGCN_"


class DataError(Exception):
    pass


def _digest(path: Path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as handle:
        for block in iter(lambda: handle.read(1 << 20), b""):
            h.update(block)
    return h.hexdigest()


def write_run_manifest(
    out_dir: Path, command: str, config: dict, inputs: list[Path], seed: int
) -> Path:
    """Emit the run manifest before any output data; verify digests on resume."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    digests = {str(p): _digest(Path(p)) for p in inputs if Path(p).is_file()}
    manifest = {
        "command": command,
        "config": config,
        "input_digests": digests,
        "seed": seed,
        "tool_version": __version__,
        "timestamp": dt.datetime.now(dt.timezone.utc).isoformat(),
    }
    path = out_dir / "run_manifest.json"
    if path.exists():
        with open(path, encoding="utf-8") as handle:
            previous = json.load(handle)
        if previous.get("command") == command:
            for key, digest in previous.get("input_digests", {}).items():
                if key in digests and digests[key] != digest:
                    raise DataError(f"input digest changed on resume: {key}")
    with open(path, "w", encoding="utf-8") as handle:
        json.dump(manifest, handle, indent=2, default=str)
    return path


def _env_overrides() -> dict[str, str]:
    return {
        key[len(ENV_PREFIX) :].lower(): value
        for key, value in os.environ.items()
        if key.startswith(ENV_PREFIX)
    }


def load_train_config(path: Path | None) -> TrainConfig:
    """Flat key-value TOML config; environment variables win over the file."""
    raw: dict = {}
    if path is not None:
        with open(path, "rb") as handle:
            raw.update(tomllib.load(handle))
    for key, value in _env_overrides().items():
        raw[key] = value
    weights = LossWeights(
        float(raw.pop("lambda_primary", 0.8)),
        float(raw.pop("lambda_authorship", 0.1)),
        float(raw.pop("lambda_citation", 0.1)),
    )
    fields = {f.name: f.type for f in dataclasses.fields(TrainConfig)}
    kwargs = {}
    for key, value in raw.items():
        if key not in fields:
            raise click.UsageError(f"unknown config key {key!r}")
        if key == "weights":
            continue
        default = getattr(TrainConfig(), key)
        if isinstance(default, bool) and isinstance(value, str):
            kwargs[key] = value.strip().lower() in ("1", "true", "yes", "on")
        else:
            kwargs[key] = type(default)(value)
    return TrainConfig(weights=weights, **kwargs)


@click.group()
def cli():
    """Legislator representation learning pipeline."""


@cli.group()
def corpus():
    """Corpus loading, validation, statistics, and splitting."""


@corpus.command("validate")
@click.option("--manifest", "manifest_path", required=True, type=click.Path(exists=True))
def corpus_validate(manifest_path):
    data = load_corpus(Path(manifest_path))
    click.echo(json.dumps({"ok": True, "stats": data.stats()}, indent=2))


@corpus.command("stats")
@click.option("--manifest", "manifest_path", required=True, type=click.Path(exists=True))
def corpus_stats(manifest_path):
    data = load_corpus(Path(manifest_path))
    click.echo(json.dumps(data.stats(), indent=2))


@corpus.command("split")
@click.option("--manifest", "manifest_path", required=True, type=click.Path(exists=True))
@click.option("--fractions", default="0.6,0.2,0.2", show_default=True)
@click.option("--min-cosponsors", default=1, show_default=True, type=int)
@click.option("--out", "out_dir", required=True, type=click.Path())
def corpus_split(manifest_path, fractions, min_cosponsors, out_dir):
    parts = tuple(float(x) for x in fractions.split(","))
    if len(parts) != 3:
        raise click.UsageError("--fractions needs three comma-separated values")
    write_run_manifest(
        Path(out_dir),
        "corpus split",
        {"fractions": parts, "min_cosponsors": min_cosponsors},
        [Path(manifest_path)],
        seed=0,
    )
    data = filter_bills(load_corpus(Path(manifest_path)), min_cosponsors)
    assignment = time_split(data, parts)
    with open(Path(out_dir) / "split.json", "w", encoding="utf-8") as handle:
        json.dump(assignment.to_json(), handle, indent=2)
    click.echo(f"wrote {Path(out_dir) / 'split.json'}")


@cli.group()
def parse():
    """Daily-edition parsing."""


@parse.command("editions")
@click.option("--in", "in_dir", required=True, type=click.Path(exists=True))
@click.option("--roster", "roster_path", required=True, type=click.Path(exists=True))
@click.option("--out", "out_dir", required=True, type=click.Path())
@click.option("--congress", default=0, type=int)
@click.option("--aliases", "alias_path", type=click.Path(exists=True))
def parse_editions_cmd(in_dir, roster_path, out_dir, congress, alias_path):
    from .corpus import Corpus, load_corpus_files

    holder = load_corpus_files({"legislators": Path(roster_path)}, congress)
    roster = list(holder.legislators.values())
    aliases = {}
    if alias_path:
        with open(alias_path, encoding="utf-8") as handle:
            aliases = json.load(handle)
    editions = []
    for path in sorted(Path(in_dir).glob("CREC-*.txt")):
        date = dt.date.fromisoformat(path.stem[len("CREC-") :])
        editions.append(DailyEdition(date, path.read_text(encoding="utf-8")))
    if not editions:
        raise DataError(f"no CREC-YYYY-MM-DD.txt files in {in_dir}")
    write_run_manifest(
        Path(out_dir), "parse editions", {"congress": congress},
        [Path(roster_path)] + sorted(Path(in_dir).glob("CREC-*.txt")), seed=0,
    )
    speeches, citations, report = parse_editions(editions, roster, congress, aliases)
    out = Path(out_dir)
    with open(out / "speeches.jsonl", "w", encoding="utf-8") as handle:
        for s in speeches:
            handle.write(json.dumps({
                "speech_id": s.speech_id,
                "author_id": s.author_id,
                "date": s.date.isoformat(),
                "text": s.text,
                "cited_ids": list(s.cited_ids),
                "congress": s.congress,
            }) + "\n")
    with open(out / "citations.jsonl", "w", encoding="utf-8") as handle:
        for citing, cited, sid in citations:
            handle.write(json.dumps(
                {"citing_id": citing, "cited_id": cited, "speech_id": sid}
            ) + "\n")
    with open(out / "drop_report.json", "w", encoding="utf-8") as handle:
        json.dump(report.to_json(), handle, indent=2)
    click.echo(json.dumps(report.to_json()))


@cli.command("encode")
@click.option("--kind", type=click.Choice(["bill", "speech"]), required=True)
@click.option("--manifest", "manifest_path", required=True, type=click.Path(exists=True))
@click.option("--backend", default="hash", type=click.Choice(["hash"]), show_default=True)
@click.option("--cache", "cache_path", required=True, type=click.Path())
@click.option("--seed", default=0, type=int, show_default=True)
def encode_cmd(kind, manifest_path, backend, cache_path, seed):
    data = load_corpus(Path(manifest_path))
    write_run_manifest(
        Path(cache_path).parent, f"encode {kind}", {"backend": backend, "seed": seed},
        [Path(manifest_path)], seed,
    )
    enc = DocumentEncoder(HashingBackend(seed=seed), EncoderConfig(seed=seed))
    if kind == "bill":
        texts = {b.bill_id: b.text for b in data.bills.values()}
    else:
        texts = {s.speech_id: s.text for s in data.speeches.values()}
    vectors = enc.encode_corpus(texts, kind)
    write_cache(Path(cache_path), vectors, enc.config.doc_dim)
    click.echo(f"encoded {len(vectors)} {kind} documents -> {cache_path}")


@cli.group("graph")
def graph_group():
    """Heterogeneous graph construction."""


@graph_group.command("build")
@click.option("--manifest", "manifest_path", required=True, type=click.Path(exists=True))
@click.option("--bill-cache", required=True, type=click.Path(exists=True))
@click.option("--speech-cache", required=True, type=click.Path(exists=True))
@click.option("--split", "split_name", default="train", show_default=True)
@click.option("--out", "out_dir", required=True, type=click.Path())
def graph_build(manifest_path, bill_cache, speech_cache, split_name, out_dir):
    if split_name != "train":
        raise click.UsageError("only the train-split graph is buildable")
    data = load_corpus(Path(manifest_path))
    assignment = time_split(data)
    _, bills = read_cache(Path(bill_cache))
    _, speeches = read_cache(Path(speech_cache))
    write_run_manifest(
        Path(out_dir), "graph build", {"split": split_name},
        [Path(manifest_path), Path(bill_cache), Path(speech_cache)], seed=0,
    )
    hetero = build_graph(data, assignment, bills, speeches)
    out = Path(out_dir)
    for node_type in NodeType:
        keys = hetero.node_keys[node_type]
        feats = hetero.features[node_type]
        write_cache(
            out / f"nodes-{node_type.value}.bin",
            {k: feats[i] for i, k in enumerate(keys)},
            feats.shape[1] if len(keys) else 0,
        )
    with open(out / "edges.jsonl", "w", encoding="utf-8") as handle:
        for edge in hetero.edges:
            handle.write(json.dumps({
                "source": [edge.source.node_type.value, edge.source.key],
                "target": [edge.target.node_type.value, edge.target.key],
                "relation": edge.relation.value,
            }) + "\n")
    click.echo(f"graph: {hetero.num_nodes()} nodes, {len(hetero.edges)} edges")


def _prepare(manifest_path, seed):
    data = load_corpus(Path(manifest_path))
    assignment = time_split(data)
    enc = DocumentEncoder(HashingBackend(seed=seed), EncoderConfig(seed=seed))
    bill_vecs = enc.encode_corpus({b.bill_id: b.text for b in data.bills.values()}, "bill")
    speech_vecs = enc.encode_corpus(
        {s.speech_id: s.text for s in data.speeches.values()}, "speech"
    )
    hetero = build_graph(data, assignment, bill_vecs, speech_vecs)
    return data, assignment, bill_vecs, speech_vecs, hetero


@cli.command("train")
@click.option("--config", "config_path", type=click.Path(exists=True))
@click.option("--manifest", "manifest_path", required=True, type=click.Path(exists=True))
@click.option("--out", "out_dir", required=True, type=click.Path())
def train_cmd(config_path, manifest_path, out_dir):
    config = load_train_config(Path(config_path) if config_path else None)
    write_run_manifest(
        Path(out_dir), "train", dataclasses.asdict(config),
        [Path(manifest_path)] + ([Path(config_path)] if config_path else []),
        config.seed,
    )
    data, assignment, _, _, hetero = _prepare(manifest_path, config.seed)
    result = train(hetero, data, assignment, config)
    out = Path(out_dir)
    with open(out / "history.csv", "w", encoding="utf-8") as handle:
        handle.write("epoch,split,task,loss,f1\n")
        for row in result.history:
            handle.write(f"{row.epoch},{row.split},{row.task},{row.loss},{row.f1}\n")
    from .rgcn import save_checkpoint

    save_checkpoint(result.model, out / "checkpoint.bin")
    click.echo(
        json.dumps({"best_validation_f1": result.best_validation_f1})
    )


@cli.group("eval")
def eval_group():
    """Baselines, ablation, and roll-call evaluation."""


@eval_group.command("baseline")
@click.option("--name", required=True, type=click.Choice(["B1", "B2", "B3", "B4", "B5", "B6", "B7"]))
@click.option("--manifest", "manifest_path", required=True, type=click.Path(exists=True))
@click.option("--ideology-scores", type=click.Path())
@click.option("--word-vectors", type=click.Path())
@click.option("--seed", default=0, type=int, show_default=True)
@click.option("--out", "out_dir", required=True, type=click.Path())
def eval_baseline(name, manifest_path, ideology_scores, word_vectors, seed, out_dir):
    write_run_manifest(
        Path(out_dir), f"eval baseline {name}", {"seed": seed},
        [Path(manifest_path)], seed,
    )
    data = load_corpus(Path(manifest_path))
    assignment = time_split(data)
    resources = BaselineResources(
        ideology_scores=Path(ideology_scores) if ideology_scores else None,
        word_vectors=Path(word_vectors) if word_vectors else None,
        seed=seed,
    )
    if name in ("B4", "B5"):
        enc = DocumentEncoder(HashingBackend(seed=seed), EncoderConfig(seed=seed))
        resources.bill_embeddings = enc.encode_corpus(
            {b.bill_id: b.text for b in data.bills.values()}, "bill"
        )
        resources.speech_embeddings = enc.encode_corpus(
            {s.speech_id: s.text for s in data.speeches.values()}, "speech"
        )
    report = run_baseline(name, data, assignment, resources)
    summary = {
        "name": name,
        "validation_f1": report.validation.f1,
        "test_f1": report.test.f1,
    }
    with open(Path(out_dir) / "baseline.json", "w", encoding="utf-8") as handle:
        json.dump(summary, handle, indent=2)
    click.echo(json.dumps(summary))


@eval_group.command("ablate")
@click.option("--manifest", "manifest_path", required=True, type=click.Path(exists=True))
@click.option("--seed", default=0, type=int, show_default=True)
@click.option("--epochs", default=8, type=int, show_default=True)
@click.option("--out", "out_dir", required=True, type=click.Path())
def eval_ablate(manifest_path, seed, epochs, out_dir):
    write_run_manifest(
        Path(out_dir), "eval ablate", {"seed": seed, "epochs": epochs},
        [Path(manifest_path)], seed,
    )
    data, assignment, _, _, hetero = _prepare(manifest_path, seed)
    rows = run_ablation(
        hetero, data, assignment, TrainConfig(seed=seed, max_epochs=epochs)
    )
    with open(Path(out_dir) / "ablation.csv", "w", encoding="utf-8") as handle:
        handle.write("config,congress,f1\n")
        for row in rows:
            handle.write(f"{row.config},{row.congress},{row.f1}\n")
    click.echo(f"wrote {Path(out_dir) / 'ablation.csv'}")


def _trained_representations(manifest_path, seed, epochs):
    data, assignment, _, _, hetero = _prepare(manifest_path, seed)
    result = train(
        hetero, data, assignment, TrainConfig(seed=seed, max_epochs=epochs)
    )
    reps = node_representations(result).numpy()
    slices = hetero.type_slices()
    leg_reps = {
        key: reps[slices[NodeType.LEGISLATOR].start + i]
        for i, key in enumerate(hetero.node_keys[NodeType.LEGISLATOR])
    }
    bill_reps = {
        key: reps[slices[NodeType.BILL].start + i]
        for i, key in enumerate(hetero.node_keys[NodeType.BILL])
    }
    return data, assignment, leg_reps, bill_reps


@eval_group.command("rollcall")
@click.option("--manifest", "manifest_path", required=True, type=click.Path(exists=True))
@click.option("--seed", default=0, type=int, show_default=True)
@click.option("--epochs", default=8, type=int, show_default=True)
@click.option("--out", "out_dir", required=True, type=click.Path())
def eval_rollcall(manifest_path, seed, epochs, out_dir):
    write_run_manifest(
        Path(out_dir), "eval rollcall", {"seed": seed}, [Path(manifest_path)], seed
    )
    data, assignment, leg_reps, bill_reps = _trained_representations(
        manifest_path, seed, epochs
    )
    report = train_rollcall(data, assignment, leg_reps, bill_reps, seed=seed)
    summary = {
        "model": {s.value: r.f1 for s, r in report.model.items()},
        "majority": {s.value: r.f1 for s, r in report.majority.items()},
    }
    with open(Path(out_dir) / "rollcall.json", "w", encoding="utf-8") as handle:
        json.dump(summary, handle, indent=2)
    click.echo(json.dumps(summary))


@cli.group("analyze")
def analyze_group():
    """Representation analyses."""


@analyze_group.command("similarity")
@click.option("--manifest", "manifest_path", required=True, type=click.Path(exists=True))
@click.option("--seed", default=0, type=int, show_default=True)
@click.option("--epochs", default=8, type=int, show_default=True)
@click.option("--out", "out_dir", required=True, type=click.Path())
def analyze_similarity(manifest_path, seed, epochs, out_dir):
    write_run_manifest(
        Path(out_dir), "analyze similarity", {"seed": seed}, [Path(manifest_path)], seed
    )
    data, assignment, leg_reps, bill_reps = _trained_representations(
        manifest_path, seed, epochs
    )
    records = similarity_analysis(data, assignment, leg_reps, bill_reps)
    paths = export_similarity(records, Path(out_dir))
    click.echo(json.dumps({k: str(v) for k, v in paths.items()}))


@analyze_group.command("project")
@click.option("--manifest", "manifest_path", required=True, type=click.Path(exists=True))
@click.option("--seed", default=0, type=int, show_default=True)
@click.option("--epochs", default=8, type=int, show_default=True)
@click.option("--out", "out_dir", required=True, type=click.Path())
def analyze_project(manifest_path, seed, epochs, out_dir):
    write_run_manifest(
        Path(out_dir), "analyze project", {"seed": seed}, [Path(manifest_path)], seed
    )
    data, assignment, leg_reps, _ = _trained_representations(manifest_path, seed, epochs)
    path = project_embeddings(data, leg_reps, Path(out_dir) / "projection.csv")
    click.echo(str(path))


def main(argv=None) -> int:
    """Dispatch with the documented exit codes."""
    try:
        cli.main(args=argv, standalone_mode=False)
        return 0
    except click.UsageError as exc:
        click.echo(f"usage error: {exc.format_message()}", err=True)
        return EXIT_USAGE
    except click.exceptions.Exit as exc:
        return exc.exit_code
    except click.Abort:
        return EXIT_USAGE
    except (CorpusError, DataError, EvalError, FileNotFoundError) as exc:
        click.echo(f"data error: {exc}", err=True)
        return EXIT_DATA
    except Exception as exc:  # noqa: BLE001
        click.echo(f"internal error: {exc}", err=True)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
