"""Inter-annotator agreement and adequacy-score aggregation.

Cohen's kappa (plain and quadratically weighted), averaged over annotator
pairs, plus the adequacy table summary that drops an annotator's item
whenever any of its three system scores is "can't decide".
"""

from __future__ import annotations

import csv
from collections import defaultdict
from dataclasses import dataclass, field
from typing import Dict, List, Mapping, Optional, Sequence, Tuple

CANT_DECIDE = "X"
SYSTEMS = ("nmt", "ape", "human")
ADEQUACY_MIN, ADEQUACY_MAX = 1, 5


class UndefinedKappaError(ValueError):
    """Chance agreement leaves no room for correction (kappa undefined)."""


@dataclass(frozen=True)
class KappaResult:
    kappa: float
    observed_agreement: float
    expected_agreement: float
    weighting: str  # "none" or "quadratic"

    def to_dict(self) -> dict:
        return {
            "kappa": self.kappa,
            "observed_agreement": self.observed_agreement,
            "expected_agreement": self.expected_agreement,
            "weighting": self.weighting,
        }


def _check_aligned(a: Sequence, b: Sequence) -> None:
    if len(a) != len(b):
        raise ValueError(f"rating lists must align: {len(a)} vs {len(b)}")
    if len(a) == 0:
        raise ValueError("rating lists must be non-empty")


def cohen_kappa(a: Sequence, b: Sequence) -> KappaResult:
    """Chance-corrected exact agreement between two raters.

    observed = fraction of identical ratings; expected = sum over
    categories of the product of the raters' marginal proportions.
    """
    _check_aligned(a, b)
    n = len(a)
    observed = sum(x == y for x, y in zip(a, b)) / n
    marg_a: Dict = defaultdict(int)
    marg_b: Dict = defaultdict(int)
    for x, y in zip(a, b):
        marg_a[x] += 1
        marg_b[y] += 1
    expected = sum(marg_a[c] * marg_b.get(c, 0) for c in marg_a) / (n * n)
    if expected == 1.0:
        raise UndefinedKappaError("both raters are constant and identical; kappa is undefined")
    kappa = (observed - expected) / (1.0 - expected)
    return KappaResult(kappa, observed, expected, weighting="none")


def weighted_kappa(
    a: Sequence[int],
    b: Sequence[int],
    scale_min: Optional[int] = None,
    scale_max: Optional[int] = None,
) -> KappaResult:
    """Quadratically weighted kappa for ordinal ratings.

    Disagreement between categories i and j weighs (i-j)^2 / (max-min)^2,
    so near misses cost less than distant ones. Scale bounds default to
    the observed min and max.
    """
    _check_aligned(a, b)
    values = list(a) + list(b)
    lo = scale_min if scale_min is not None else min(values)
    hi = scale_max if scale_max is not None else max(values)
    if hi <= lo:
        raise ValueError("ordinal scale needs max > min")
    span_sq = (hi - lo) ** 2
    out_of_scale = [v for v in values if not lo <= v <= hi]
    if out_of_scale:
        raise ValueError(f"ratings outside scale [{lo}, {hi}]: {sorted(set(out_of_scale))}")

    n = len(a)
    marg_a: Dict[int, int] = defaultdict(int)
    marg_b: Dict[int, int] = defaultdict(int)
    observed_dis = 0.0
    for x, y in zip(a, b):
        marg_a[x] += 1
        marg_b[y] += 1
        observed_dis += (x - y) ** 2 / span_sq
    observed_dis /= n
    expected_dis = sum(
        ca * cb * (i - j) ** 2 / span_sq for i, ca in marg_a.items() for j, cb in marg_b.items()
    ) / (n * n)
    if expected_dis == 0.0:
        raise UndefinedKappaError("no expected disagreement; weighted kappa is undefined")
    kappa = 1.0 - observed_dis / expected_dis
    return KappaResult(
        kappa,
        observed_agreement=1.0 - observed_dis,
        expected_agreement=1.0 - expected_dis,
        weighting="quadratic",
    )


@dataclass(frozen=True)
class PairwiseKappa:
    """Mean kappa over all unordered annotator pairs."""

    mean_kappa: float
    pairs: Tuple[Tuple[str, str, float], ...]
    skipped_pairs: int
    weighting: str

    def to_dict(self) -> dict:
        return {
            "mean_kappa": self.mean_kappa,
            "pairs": [{"a": a, "b": b, "kappa": k} for a, b, k in self.pairs],
            "skipped_pairs": self.skipped_pairs,
            "weighting": self.weighting,
        }


def pairwise_average_kappa(
    ratings: Mapping[str, Sequence],
    weighting: str = "none",
    scale_min: Optional[int] = None,
    scale_max: Optional[int] = None,
) -> PairwiseKappa:
    """Average kappa over annotator pairs, items aligned by position.

    Pairs whose kappa is undefined are skipped and counted.
    """
    if weighting not in ("none", "quadratic"):
        raise ValueError(f"unknown weighting {weighting!r}")
    names = sorted(ratings)
    if len(names) < 2:
        raise ValueError("pairwise agreement needs at least two annotators")
    lengths = {len(ratings[n]) for n in names}
    if len(lengths) != 1:
        raise ValueError("annotators rated different numbers of items")

    pairs: List[Tuple[str, str, float]] = []
    skipped = 0
    for i, name_a in enumerate(names):
        for name_b in names[i + 1 :]:
            try:
                if weighting == "quadratic":
                    result = weighted_kappa(ratings[name_a], ratings[name_b], scale_min, scale_max)
                else:
                    result = cohen_kappa(ratings[name_a], ratings[name_b])
            except UndefinedKappaError:
                skipped += 1
                continue
            pairs.append((name_a, name_b, result.kappa))
    if not pairs:
        raise UndefinedKappaError("kappa undefined for every annotator pair")
    mean = sum(k for _, _, k in pairs) / len(pairs)
    return PairwiseKappa(mean, tuple(pairs), skipped, weighting)


@dataclass
class AdequacyTable:
    """Adequacy ratings: annotator -> item -> system -> score or cant_decide.

    Scores are integers 1..5; the string "X" marks "I can't decide".
    """

    scores: Dict[str, Dict[str, Dict[str, object]]] = field(default_factory=dict)

    def add(self, annotator: str, item: str, system: str, score) -> None:
        if system not in SYSTEMS:
            raise ValueError(f"unknown system {system!r}, expected one of {SYSTEMS}")
        if score != CANT_DECIDE and not (
            isinstance(score, int) and ADEQUACY_MIN <= score <= ADEQUACY_MAX
        ):
            raise ValueError(
                f"score must be {ADEQUACY_MIN}..{ADEQUACY_MAX} or {CANT_DECIDE!r}, got {score!r}"
            )
        self.scores.setdefault(annotator, {}).setdefault(item, {})[system] = score

    def annotators(self) -> List[str]:
        return sorted(self.scores)


def read_adequacy_csv(path) -> AdequacyTable:
    """Ingest annotator_id,item_id,system,score rows (header optional)."""
    table = AdequacyTable()
    errors = []
    with open(path, encoding="utf-8", newline="") as handle:
        for line_no, row in enumerate(csv.reader(handle), start=1):
            if not row or (line_no == 1 and [c.lower() for c in row[:2]] == ["annotator_id", "item_id"]):
                continue
            if len(row) != 4:
                errors.append(f"line {line_no}: expected 4 columns, found {len(row)}")
                continue
            annotator, item, system, raw_score = (c.strip() for c in row)
            score = raw_score if raw_score == CANT_DECIDE else None
            if score is None:
                try:
                    score = int(raw_score)
                except ValueError:
                    errors.append(f"line {line_no}: bad score {raw_score!r}")
                    continue
            try:
                table.add(annotator, item, system.lower(), score)
            except ValueError as exc:
                errors.append(f"line {line_no}: {exc}")
    if errors:
        raise ValueError("malformed adequacy rows: " + "; ".join(errors))
    return table


def shared_decided_ratings(table: AdequacyTable) -> Tuple[List[str], Dict[str, List[int]]]:
    """Aligned rating vectors over the items every annotator fully decided.

    An item qualifies when every annotator scored all three systems and
    none of those scores is "can't decide". The vectors flatten the
    surviving (item, system) grid in a fixed order, ready for kappa.
    """
    annotators = table.annotators()
    if len(annotators) < 2:
        raise ValueError("agreement needs at least two annotators")
    shared = set.intersection(*(set(table.scores[a]) for a in annotators))
    used = []
    for item in sorted(shared):
        cells = [table.scores[a][item] for a in annotators]
        if all(set(c) == set(SYSTEMS) for c in cells) and all(
            c[s] != CANT_DECIDE for c in cells for s in SYSTEMS
        ):
            used.append(item)
    if not used:
        raise ValueError("no fully decided items shared by all annotators")
    ratings = {
        a: [table.scores[a][item][s] for item in used for s in SYSTEMS] for a in annotators
    }
    return used, ratings


@dataclass(frozen=True)
class AdequacySummary:
    """Per-annotator and pooled mean adequacy per system with eval counts."""

    per_annotator: Tuple[dict, ...]
    overall: dict

    def to_dict(self) -> dict:
        return {"per_annotator": list(self.per_annotator), "overall": self.overall}


def adequacy_summary(table: AdequacyTable) -> AdequacySummary:
    """Mean adequacy per system, keeping only fully decided items.

    An item counts for an annotator only when all three system scores are
    decided. Rows report used vs assigned item counts; the overall row
    pools every used evaluation rather than averaging annotator means.
    """
    rows = []
    pooled = {system: [] for system in SYSTEMS}
    pooled_used = pooled_assigned = 0
    for annotator in table.annotators():
        items = table.scores[annotator]
        used_scores = {system: [] for system in SYSTEMS}
        used = 0
        for item in sorted(items):
            by_system = items[item]
            if set(by_system) != set(SYSTEMS):
                raise ValueError(
                    f"annotator {annotator!r} item {item!r}: expected scores for all of {SYSTEMS}"
                )
            if any(by_system[s] == CANT_DECIDE for s in SYSTEMS):
                continue
            used += 1
            for system in SYSTEMS:
                used_scores[system].append(by_system[system])
                pooled[system].append(by_system[system])
        assigned = len(items)
        pooled_used += used
        pooled_assigned += assigned
        rows.append(
            {
                "annotator": annotator,
                "means": {
                    s: (sum(v) / len(v) if v else None) for s, v in used_scores.items()
                },
                "used": used,
                "assigned": assigned,
            }
        )
    overall = {
        "annotator": "overall",
        "means": {s: (sum(v) / len(v) if v else None) for s, v in pooled.items()},
        "used": pooled_used,
        "assigned": pooled_assigned,
    }
    return AdequacySummary(per_annotator=tuple(rows), overall=overall)
