"""Leaderboard, corpus and correlation reports over an export file.

An export carries no vote timestamps, so rating replay over a dataset uses
the dataset's canonical order, (created_at, battle_id). A live service
additionally knows vote times and replays by those; the two agree whenever
votes land in battle-creation order.
"""

from __future__ import annotations

import csv
from typing import Any, Sequence

from .elo import EloConfig, rate_all
from .errors import DegenerateInputError, FormatError, InvalidArgumentError
from .models import Environment, ExportRecord, Outcome, Sentiment
from .stats import corpus_stats, pearson, spearman

CORRELATION_COLUMNS = ("elo", "satisfaction", "reference")


def read_reference_csv(path: str) -> dict[str, float]:
    """Load an external per-CRS metric; header must be ``crs_id,value``."""
    reference: dict[str, float] = {}
    with open(path, encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise FormatError("reference CSV is empty", line=1) from None
        if [h.strip() for h in header] != ["crs_id", "value"]:
            raise FormatError("reference CSV header must be 'crs_id,value'", line=1)
        for lineno, row in enumerate(reader, start=2):
            if not row or not "".join(row).strip():
                continue
            if len(row) != 2:
                raise FormatError("expected two columns", line=lineno)
            try:
                reference[row[0].strip()] = float(row[1])
            except ValueError:
                raise FormatError(f"bad value {row[1]!r}", line=lineno) from None
    return reference


def filter_records(
    records: Sequence[ExportRecord], environment: Environment | None
) -> list[ExportRecord]:
    if environment is None:
        return list(records)
    return [r for r in records if r.environment is environment]


def _satisfaction_rates(records: Sequence[ExportRecord]) -> dict[str, float | None]:
    ended: dict[str, int] = {}
    satisfied: dict[str, int] = {}
    for record in records:
        for side in record.sides():
            ended.setdefault(side.crs_id, 0)
            satisfied.setdefault(side.crs_id, 0)
            if side.sentiment is not Sentiment.NONE_YET:
                ended[side.crs_id] += 1
                if side.sentiment is Sentiment.SATISFACTION:
                    satisfied[side.crs_id] += 1
    return {
        crs_id: round(100.0 * satisfied[crs_id] / n, 1) if n else None
        for crs_id, n in ended.items()
    }


def _rating_columns(
    records: Sequence[ExportRecord], elo_config: EloConfig
) -> tuple[dict[str, float], dict[str, int], int]:
    registry = sorted({s.crs_id for r in records for s in r.sides()})
    ordered = sorted(records, key=lambda r: (r.created_at, r.battle_id))
    battles = [(r.side_a.crs_id, r.side_b.crs_id, r.outcome) for r in ordered]
    table = rate_all(battles, registry, elo_config)
    return dict(table.ratings), dict(table.ranks), table.battles_processed


def correlate_columns(
    records: Sequence[ExportRecord],
    columns: tuple[str, str],
    reference: dict[str, float] | None = None,
    elo_config: EloConfig = EloConfig(),
) -> dict[str, Any]:
    """Spearman and Pearson between two per-CRS ranking columns.

    Only CRSs with a defined value in both columns enter the correlation
    (e.g. systems without an external reference metric are dropped).
    """
    for column in columns:
        if column not in CORRELATION_COLUMNS:
            raise InvalidArgumentError(
                f"unknown column {column!r}, expected one of {CORRELATION_COLUMNS}"
            )
    if columns[0] == columns[1]:
        raise InvalidArgumentError("pick two different columns")
    if "reference" in columns and reference is None:
        raise InvalidArgumentError("a reference CSV is required for the reference column")

    ratings, _, _ = _rating_columns(records, elo_config)
    satisfaction = _satisfaction_rates(records)
    sources: dict[str, dict[str, float | None]] = {
        "elo": dict(ratings),
        "satisfaction": satisfaction,
        "reference": reference or {},
    }
    crs_ids = sorted(
        crs_id
        for crs_id in ratings
        if all(sources[c].get(crs_id) is not None for c in columns)
    )
    if len(crs_ids) < 2:
        raise DegenerateInputError("fewer than 2 CRSs have both columns defined")
    x = [float(sources[columns[0]][crs_id]) for crs_id in crs_ids]
    y = [float(sources[columns[1]][crs_id]) for crs_id in crs_ids]
    return {
        "columns": list(columns),
        "n_systems": len(crs_ids),
        "crs_ids": crs_ids,
        "spearman": spearman(x, y),
        "pearson": pearson(x, y),
    }


def build_report(
    records: Sequence[ExportRecord],
    reference: dict[str, float] | None = None,
    elo_config: EloConfig = EloConfig(),
) -> dict[str, Any]:
    """Full report: leaderboard, per-environment corpus stats, correlations."""
    report: dict[str, Any] = {
        "n_battles": len(records),
        "n_votes": sum(1 for r in records if r.outcome is not Outcome.PENDING),
    }
    if not records:
        report["leaderboard"] = []
        report["corpus"] = {}
        report["correlations"] = {}
        return report

    ratings, ranks, processed = _rating_columns(records, elo_config)
    satisfaction = _satisfaction_rates(records)
    conversations = {crs_id: 0 for crs_id in ratings}
    for record in records:
        for side in record.sides():
            conversations[side.crs_id] += 1
    report["battles_processed"] = processed
    report["leaderboard"] = [
        {
            "crs_id": crs_id,
            "elo": round(ratings[crs_id], 3),
            "rank": ranks[crs_id],
            "satisfaction_pct": satisfaction[crs_id],
            "n_conversations": conversations[crs_id],
        }
        for crs_id in sorted(ratings, key=lambda c: (ranks[c], c))
    ]

    corpus: dict[str, Any] = {}
    environments = sorted({r.environment.value for r in records})
    scopes = [("all", list(records))] + [
        (env, [r for r in records if r.environment.value == env]) for env in environments
    ]
    for name, scoped in scopes:
        overall = corpus_stats(scoped, "all")
        corpus[name] = {
            "n_dialogues": overall.n_dialogues,
            "n_votes": overall.n_votes,
            "utterances_per_dialogue": round(overall.utterances_per_dialogue, 4),
            "words_per_utterance": round(overall.words_per_utterance, 4),
            "distinct2_system": round(corpus_stats(scoped, "system").distinct2, 4),
        }
    report["corpus"] = corpus

    correlations: dict[str, Any] = {}
    for pair in (("elo", "satisfaction"),) + ((("elo", "reference"),) if reference else ()):
        try:
            result = correlate_columns(records, pair, reference, elo_config)
        except DegenerateInputError:
            continue
        correlations["_vs_".join(pair)] = {
            "n_systems": result["n_systems"],
            "spearman": round(result["spearman"], 6),
            "pearson": round(result["pearson"], 6),
        }
    report["correlations"] = correlations
    return report


def format_table(report: dict[str, Any]) -> str:
    """Human-readable rendering of :func:`build_report` output."""
    lines: list[str] = []
    lines.append(f"battles: {report['n_battles']}   votes: {report['n_votes']}")
    board = report.get("leaderboard", [])
    if board:
        lines.append("")
        lines.append(f"{'rank':>4}  {'crs_id':<24} {'elo':>8}  {'sat%':>6}  {'convs':>5}")
        for row in board:
            sat = "-" if row["satisfaction_pct"] is None else f"{row['satisfaction_pct']:.1f}"
            lines.append(
                f"{row['rank']:>4}  {row['crs_id']:<24} {row['elo']:>8.1f}  "
                f"{sat:>6}  {row['n_conversations']:>5}"
            )
    corpus = report.get("corpus", {})
    if corpus:
        lines.append("")
        lines.append(
            f"{'corpus':<8} {'dialogues':>9}  {'votes':>5}  {'utts/dlg':>8}  "
            f"{'words/utt':>9}  {'distinct2':>9}"
        )
        for name, row in corpus.items():
            lines.append(
                f"{name:<8} {row['n_dialogues']:>9}  {row['n_votes']:>5}  "
                f"{row['utterances_per_dialogue']:>8.2f}  "
                f"{row['words_per_utterance']:>9.2f}  {row['distinct2_system']:>9.3f}"
            )
    correlations = report.get("correlations", {})
    if correlations:
        lines.append("")
        for name, row in correlations.items():
            lines.append(
                f"{name}: spearman={row['spearman']:.3f} pearson={row['pearson']:.3f} "
                f"(n={row['n_systems']})"
            )
    return "\n".join(lines) + "\n"
