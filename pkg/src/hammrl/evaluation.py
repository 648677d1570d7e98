"""Rank-change evaluation of mitigation methods.

The figure of merit is the competition rank of the known correct outcome:
rank_change = rank_before - rank_after, so positive means the mitigation
moved the right answer up. Aggregates report the percentage of circuits
improved/unchanged/worsened and the mean rank change. Total variation
distance is carried along per record as an informational value only; it is
never part of the pinned CSV tables.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from statistics import fmean
from typing import Callable, Mapping, Sequence

from . import _jsontext
from .distribution import ProbDistribution, rank_of
from .errors import InvalidInputError

CATEGORY_IMPROVED = "improved"
CATEGORY_UNCHANGED = "unchanged"
CATEGORY_WORSENED = "worsened"

RECORDS_CSV_HEADER = "method,dataset,secret,rank_before,rank_after,rank_change,category"
SUMMARY_CSV_HEADER = "method,dataset,pct_improved,pct_unchanged,pct_worsened,mean_rank_change"

# Label for rows aggregating a method across every dataset of a comparison.
ALL_DATASETS = "all"

Mitigator = Callable[[ProbDistribution], ProbDistribution]


@dataclass(frozen=True)
class RankChangeRecord:
    secret: str
    rank_before: int
    rank_after: int
    rank_change: int
    category: str
    tvd: float


@dataclass(frozen=True)
class DatasetReport:
    method: str
    dataset: str
    pct_improved: float
    pct_unchanged: float
    pct_worsened: float
    mean_rank_change: float
    records: tuple[RankChangeRecord, ...]


def total_variation_distance(a: ProbDistribution, b: ProbDistribution) -> float:
    """Half the L1 distance over the union of supports."""
    if a.n_qubits != b.n_qubits:
        raise InvalidInputError("distributions differ in qubit count")
    keys = set(a.probs) | set(b.probs)
    return 0.5 * sum(abs(a.get(k) - b.get(k)) for k in sorted(keys))


def score_circuit(before: ProbDistribution, after: ProbDistribution,
                  secret: str) -> RankChangeRecord:
    """Rank the secret in both distributions and categorize the change."""
    if before.n_qubits != after.n_qubits:
        raise InvalidInputError("before/after distributions differ in qubit count")
    rank_before = rank_of(before, secret)
    rank_after = rank_of(after, secret)
    change = rank_before - rank_after
    if change > 0:
        category = CATEGORY_IMPROVED
    elif change < 0:
        category = CATEGORY_WORSENED
    else:
        category = CATEGORY_UNCHANGED
    return RankChangeRecord(
        secret=str(secret),
        rank_before=rank_before,
        rank_after=rank_after,
        rank_change=change,
        category=category,
        tvd=total_variation_distance(before, after),
    )


def aggregate(records: Sequence[RankChangeRecord], method: str,
              dataset: str) -> DatasetReport:
    """Category percentages (full precision) and mean rank change."""
    if not records:
        raise InvalidInputError("cannot aggregate zero records")
    n = len(records)
    by_cat = {CATEGORY_IMPROVED: 0, CATEGORY_UNCHANGED: 0, CATEGORY_WORSENED: 0}
    for rec in records:
        by_cat[rec.category] += 1
    return DatasetReport(
        method=method,
        dataset=dataset,
        pct_improved=100.0 * by_cat[CATEGORY_IMPROVED] / n,
        pct_unchanged=100.0 * by_cat[CATEGORY_UNCHANGED] / n,
        pct_worsened=100.0 * by_cat[CATEGORY_WORSENED] / n,
        mean_rank_change=fmean(rec.rank_change for rec in records),
        records=tuple(records),
    )


def evaluate_method(circuits: Sequence[tuple[str, ProbDistribution]],
                    mitigate: Mitigator, method: str,
                    dataset: str) -> DatasetReport:
    """Run one mitigator over (secret, measured distribution) pairs."""
    records = [
        score_circuit(before, mitigate(before), secret)
        for secret, before in circuits
    ]
    return aggregate(records, method, dataset)


def compare_methods(
    datasets: Mapping[str, Sequence[tuple[str, ProbDistribution]]],
    methods: Mapping[str, Mitigator],
) -> tuple[list[DatasetReport], dict[str, float]]:
    """Every method over every dataset, on identical inputs.

    Returns the per-(method, dataset) reports in method-major order plus
    each method's grand mean: the unweighted mean over datasets of the
    per-dataset mean rank change.
    """
    if not datasets:
        raise InvalidInputError("compare_methods needs at least one dataset")
    if not methods:
        raise InvalidInputError("compare_methods needs at least one method")
    reports: list[DatasetReport] = []
    grand: dict[str, float] = {}
    for method, mitigate in methods.items():
        per_dataset = [
            evaluate_method(circuits, mitigate, method, dataset)
            for dataset, circuits in datasets.items()
        ]
        reports.extend(per_dataset)
        grand[method] = fmean(r.mean_rank_change for r in per_dataset)
    return reports, grand


def _grand_rows(reports: Sequence[DatasetReport],
                grand_means: Mapping[str, float]) -> list[DatasetReport]:
    rows = []
    for method, mean in grand_means.items():
        mine = [r for r in reports if r.method == method]
        rows.append(DatasetReport(
            method=method,
            dataset=ALL_DATASETS,
            pct_improved=fmean(r.pct_improved for r in mine),
            pct_unchanged=fmean(r.pct_unchanged for r in mine),
            pct_worsened=fmean(r.pct_worsened for r in mine),
            mean_rank_change=mean,
            records=(),
        ))
    return rows


def records_csv_lines(reports: Sequence[DatasetReport]) -> list[str]:
    lines = [RECORDS_CSV_HEADER]
    for report in reports:
        for rec in report.records:
            lines.append(
                f"{report.method},{report.dataset},{rec.secret},"
                f"{rec.rank_before},{rec.rank_after},{rec.rank_change},{rec.category}"
            )
    return lines


def summary_csv_lines(reports: Sequence[DatasetReport],
                      grand_means: Mapping[str, float] | None = None) -> list[str]:
    """Summary rows with percentages at one decimal and means at two."""
    rows = list(reports)
    if grand_means is not None:
        rows.extend(_grand_rows(reports, grand_means))
    lines = [SUMMARY_CSV_HEADER]
    for r in rows:
        lines.append(
            f"{r.method},{r.dataset},{r.pct_improved:.1f},{r.pct_unchanged:.1f},"
            f"{r.pct_worsened:.1f},{r.mean_rank_change:.2f}"
        )
    return lines


def write_records_csv(path, reports: Sequence[DatasetReport]) -> None:
    Path(path).write_text("\n".join(records_csv_lines(reports)) + "\n",
                          encoding="utf-8")


def write_summary_csv(path, reports: Sequence[DatasetReport],
                      grand_means: Mapping[str, float] | None = None) -> None:
    Path(path).write_text("\n".join(summary_csv_lines(reports, grand_means)) + "\n",
                          encoding="utf-8")


def report_json_dict(reports: Sequence[DatasetReport],
                     grand_means: Mapping[str, float] | None = None) -> dict:
    """Full-precision mirror of the CSV tables, plus per-record TVD."""
    out: dict = {
        "reports": [
            {
                "method": r.method,
                "dataset": r.dataset,
                "pct_improved": r.pct_improved,
                "pct_unchanged": r.pct_unchanged,
                "pct_worsened": r.pct_worsened,
                "mean_rank_change": r.mean_rank_change,
                "records": [
                    {
                        "secret": rec.secret,
                        "rank_before": rec.rank_before,
                        "rank_after": rec.rank_after,
                        "rank_change": rec.rank_change,
                        "category": rec.category,
                        "tvd": rec.tvd,
                    }
                    for rec in r.records
                ],
            }
            for r in reports
        ],
    }
    if grand_means is not None:
        out["grand_mean_rank_change"] = dict(grand_means)
    return out


def write_report_json(path, reports: Sequence[DatasetReport],
                      grand_means: Mapping[str, float] | None = None) -> None:
    _jsontext.dump(path, report_json_dict(reports, grand_means))
