"""Command-line interface: mine rules, run learning sessions, evaluate, serve."""

from __future__ import annotations

import dataclasses
import json
import socket
from pathlib import Path

import click
import numpy as np

from .choquet import MobiusCapacity, SubsetIndex, augment_matrix
from .corpus import load_transactions, mine_rules
from .evalkit import (
    aggregate_rows,
    convergence_report,
    jaccard_topk_diversity,
    write_metrics_csv,
)
from .learner import SessionConfig, read_session_log, run_gbs, write_session_log
from .measures import feature_matrix_from_raw, read_rules_csv, write_rules_csv
from .oracles import hidden_choquet_oracle, phi_oracle, surprise_oracle
from .versionspace import InfeasibleVersionSpace, LPError


def _fail(message: str) -> "click.ClickException":
    return click.ClickException(message)


@click.group()
def cli():
    """Interactive learning of personal association-rule rankings."""


@cli.command("mine")
@click.option("--input", "input_path", type=click.Path(exists=True, dir_okay=False), required=True)
@click.option("--min-support", type=int, default=10, show_default=True)
@click.option("--min-confidence", type=float, default=0.99, show_default=True)
@click.option("--max-rules", type=int, default=100_000, show_default=True)
@click.option("--out", "out_path", type=click.Path(dir_okay=False), required=True)
def cmd_mine(input_path, min_support, min_confidence, max_rules, out_path):
    """Mine association rules and write the rule-feature CSV."""
    try:
        db = load_transactions(input_path)
    except ValueError as exc:
        raise click.UsageError(str(exc))
    try:
        rules = mine_rules(db, min_support=min_support, min_confidence=min_confidence,
                           max_rules=max_rules)
        write_rules_csv(rules, out_path)
    except OSError as exc:
        raise click.UsageError(str(exc))
    except (ValueError, RuntimeError) as exc:
        raise _fail(str(exc))
    click.echo(f"wrote {len(rules)} rules to {out_path}")


def _load_features(rules_csv):
    rules, raw, kinds = read_rules_csv(rules_csv)
    fm = feature_matrix_from_raw(raw, kinds)
    kept_rules = [rules[i] for i in fm.kept]
    return kept_rules, raw[fm.kept], fm.norm, kinds


def _build_oracle(spec: str, rules, features, transactions_path):
    if spec == "phi":
        return phi_oracle()
    if spec == "surprise":
        if transactions_path is None:
            raise click.UsageError("--oracle surprise needs --transactions")
        db = load_transactions(transactions_path)
        return surprise_oracle(db)
    if spec.startswith("choquet:"):
        path = Path(spec.split(":", 1)[1])
        if not path.exists():
            raise click.UsageError(f"capacity file not found: {path}")
        capacity = MobiusCapacity.load_json(path)
        if capacity.index.d != features.shape[1]:
            raise click.UsageError(
                f"capacity is over {capacity.index.d} features, rules have {features.shape[1]}"
            )
        return hidden_choquet_oracle(capacity, rules, features)
    raise click.UsageError(f"unknown oracle {spec!r} (expected phi|surprise|choquet:<json>)")


def _fold_partition(n: int, folds: int, rng: np.random.Generator) -> list[np.ndarray]:
    order = rng.permutation(n)
    return [np.sort(order[i::folds]) for i in range(folds)]


@cli.command("learn")
@click.option("--rules", "rules_csv", type=click.Path(exists=True, dir_okay=False), required=True)
@click.option("--oracle", "oracle_spec", default="phi", show_default=True,
              help="phi | surprise | choquet:<capacity.json>")
@click.option("--transactions", type=click.Path(exists=True, dir_okay=False), default=None,
              help="FIMI transactions (required for --oracle surprise)")
@click.option("--k", type=int, default=2, show_default=True)
@click.option("--center", type=click.Choice(["chebyshev", "minkowski"]), default="chebyshev",
              show_default=True)
@click.option("--selection", type=click.Choice(["bnb", "random"]), default="bnb", show_default=True)
@click.option("--bound-mode", type=click.Choice(["paper", "exact"]), default="paper",
              show_default=True)
@click.option("--iterations", type=int, default=30, show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--folds", type=int, default=1, show_default=True)
@click.option("--out-dir", type=click.Path(file_okay=False), default=".", show_default=True)
def cmd_learn(rules_csv, oracle_spec, transactions, k, center, selection, bound_mode,
              iterations, seed, folds, out_dir):
    """Run one simulated learning session per fold; write logs and capacities.

    With --folds f > 1, rules are partitioned by a seeded shuffle; each
    session trains on the other f-1 folds and the held-out fold is recorded
    for evaluation.
    """
    if k < 1:
        raise click.UsageError("--k must be >= 1")
    if iterations < 1:
        raise click.UsageError("--iterations must be >= 1")
    if folds < 1:
        raise click.UsageError("--folds must be >= 1")
    out_root = Path(out_dir)
    out_root.mkdir(parents=True, exist_ok=True)
    try:
        rules, raw, features, kinds = _load_features(rules_csv)
    except (ValueError, OSError) as exc:
        raise click.UsageError(str(exc))
    n = len(rules)
    if folds > 1:
        parts = _fold_partition(n, folds, np.random.default_rng(seed))
    else:
        parts = [np.arange(n)]

    for fold in range(folds):
        if folds > 1:
            eval_idx = parts[fold]
            train_idx = np.sort(np.concatenate([parts[i] for i in range(folds) if i != fold]))
        else:
            eval_idx = np.arange(n)
            train_idx = np.arange(n)
        train_rules = [rules[i] for i in train_idx]
        train_features = features[train_idx]
        oracle = _build_oracle(oracle_spec, train_rules, train_features, transactions)
        cfg = SessionConfig(
            k=k, center_kind=center, selection=selection, bound_mode=bound_mode,
            max_iterations=iterations, seed=seed + fold,
        )
        try:
            result = run_gbs(train_rules, train_features, oracle, cfg)
        except (InfeasibleVersionSpace, LPError, ValueError) as exc:
            raise _fail(f"fold {fold}: {exc}")
        log_path = out_root / f"session_{fold}.jsonl"
        write_session_log(result.records, log_path)
        result.capacity.dump_json(out_root / f"capacity_{fold}.json")
        meta = {
            "fold": fold,
            "seed": seed + fold,
            "config": dataclasses.asdict(cfg),
            "status": result.status,
            "oracle": oracle_spec,
            "rules_csv": str(rules_csv),
            "train_indices": [int(i) for i in train_idx],
            "eval_indices": [int(i) for i in eval_idx],
        }
        (out_root / f"session_{fold}.meta.json").write_text(
            json.dumps(meta, indent=2, sort_keys=True) + "\n"
        )
        click.echo(
            f"fold {fold}: {result.n_queries} queries, status={result.status}, "
            f"log={log_path}"
        )


def _infer_k(d: int, center_dim: int) -> int:
    for k in range(1, d + 1):
        if SubsetIndex.count(d, k) == center_dim:
            return k
    raise ValueError(f"no additivity level matches center dimension {center_dim} for d={d}")


@cli.command("eval")
@click.option("--logs", "logs_glob", required=True, help="glob of session JSONL logs")
@click.option("--rules", "rules_csv", type=click.Path(exists=True, dir_okay=False), required=True)
@click.option("--oracle", "oracle_spec", default="phi", show_default=True)
@click.option("--transactions", type=click.Path(exists=True, dir_okay=False), default=None)
@click.option("--cutoffs", default="5,10,15", show_default=True)
@click.option("--jaccard-k", type=int, default=15, show_default=True)
@click.option("--out", "out_path", type=click.Path(dir_okay=False), default="metrics.csv",
              show_default=True)
def cmd_eval(logs_glob, rules_csv, oracle_spec, transactions, cutoffs, jaccard_k, out_path):
    """Score session logs against an oracle ranking; write the metrics CSV."""
    log_paths = sorted(Path().glob(logs_glob)) if not Path(logs_glob).is_absolute() else sorted(
        Path(logs_glob).parent.glob(Path(logs_glob).name)
    )
    if not log_paths:
        raise click.UsageError(f"no logs matched {logs_glob!r}")
    try:
        cutoff_values = [int(c) for c in cutoffs.split(",") if c.strip()]
    except ValueError:
        raise click.UsageError(f"bad --cutoffs {cutoffs!r}")
    if not cutoff_values:
        raise click.UsageError("--cutoffs must name at least one cutoff")
    try:
        rules, raw, features, kinds = _load_features(rules_csv)
    except (ValueError, OSError) as exc:
        raise click.UsageError(str(exc))
    db = None
    if transactions is not None:
        db = load_transactions(transactions)

    rows = []
    for log_path in log_paths:
        records = read_session_log(log_path)
        if not records:
            continue
        meta_path = log_path.with_name(log_path.name.replace(".jsonl", ".meta.json"))
        if meta_path.exists():
            meta = json.loads(meta_path.read_text())
            eval_idx = np.asarray(meta["eval_indices"], dtype=int)
            train_idx = np.asarray(meta["train_indices"], dtype=int)
            seed, fold = meta.get("seed", ""), meta.get("fold", "")
        else:
            eval_idx = np.arange(len(rules))
            train_idx = np.arange(len(rules))
            seed, fold = log_path.stem, ""
        eval_rules = [rules[i] for i in eval_idx]
        eval_features = features[eval_idx]
        oracle = _build_oracle(oracle_spec, eval_rules, eval_features, transactions)
        oracle_scores = np.array([oracle.score(r) for r in eval_rules])
        oracle_order = [int(i) for i in np.argsort(-oracle_scores, kind="stable")]
        k = _infer_k(features.shape[1], len(records[0].center))
        index = SubsetIndex(features.shape[1], k)
        psi_eval = augment_matrix(eval_features, index)
        psi_train = augment_matrix(features[train_idx], index)
        log_rows = convergence_report(
            [records], [(seed, fold)], psi_eval=psi_eval, oracle_order=oracle_order,
            cutoffs=cutoff_values, psi_train=psi_train, aggregate=False,
        )
        rows.extend(log_rows)
        if db is not None and len(eval_rules) >= 2:
            final_scores = psi_eval @ records[-1].center
            learned_order = [int(i) for i in np.argsort(-final_scores, kind="stable")]
            kk = min(jaccard_k, len(eval_rules))
            entries = jaccard_topk_diversity(db, eval_rules, learned_order, k=kk)
            if entries:
                values = [e.value for e in entries]
                last = records[-1].iteration
                for name, val in (
                    ("jaccard_mean", float(np.mean(values))),
                    ("jaccard_median", float(np.median(values))),
                    ("jaccard_zero_cover", float(sum(e.zero_cover for e in entries))),
                ):
                    rows.append(dict(iteration=last, metric=name, cutoff=kk,
                                     value=val, seed=seed, fold=fold))
    if not rows:
        raise click.UsageError("matched logs contain no records")
    rows.extend(aggregate_rows(rows))
    write_metrics_csv(rows, out_path)
    click.echo(f"wrote {len(rows)} metric rows to {out_path}")


@cli.command("serve")
@click.option("--rules", "rules_csv", type=click.Path(exists=True, dir_okay=False), required=True)
@click.option("--transactions", type=click.Path(exists=True, dir_okay=False), default=None)
@click.option("--port", type=int, default=8080, show_default=True)
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--static", "static_dir", type=click.Path(exists=True, file_okay=False), default=None)
@click.option("--log-dir", type=click.Path(file_okay=False), default=None,
              help="directory for event-sourced session persistence")
def cmd_serve(rules_csv, transactions, port, host, static_dir, log_dir):
    """Host the interactive session API (and optionally the web UI)."""
    import uvicorn

    from .service import create_app, load_ruleset

    probe = socket.socket(socket.AF_INET, socket.SOCK_STREAM)
    probe.setsockopt(socket.SOL_SOCKET, socket.SO_REUSEADDR, 1)
    try:
        probe.bind((host, port))
    except OSError as exc:
        raise click.UsageError(f"cannot bind {host}:{port}: {exc}")
    finally:
        probe.close()

    db = load_transactions(transactions) if transactions is not None else None
    try:
        bundle = load_ruleset(rules_csv, db=db)
    except (ValueError, OSError) as exc:
        raise click.UsageError(str(exc))
    app = create_app(bundle, log_dir=log_dir, static_dir=static_dir)
    click.echo(f"serving {bundle.n_rules} rules on http://{host}:{port}")
    uvicorn.run(app, host=host, port=port, log_level="warning")


main = cli

if __name__ == "__main__":
    main()
