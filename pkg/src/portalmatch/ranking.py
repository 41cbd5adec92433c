"""Weight and order hypotheses for verification.

Three factors per hypothesis: probability of a positive verification (mean
edge confidence), verification cost (a blend of edge count and the schema
size of the involved datasets), and integration benefit (how connected the
involved datasets are, scaled by their usage-derived relevance). The final
score multiplies the min-max normalized factors, with cost inverted.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

from .corpus import Corpus
from .hypotheses import Hypothesis

__all__ = [
    "Strategy",
    "UsageStats",
    "RankingConfig",
    "RankedHypothesis",
    "DistReport",
    "probability",
    "strategy_transform",
    "cost",
    "benefit",
    "relevance",
    "rank",
    "distribution_report",
]


class Strategy(Enum):
    MOST_LIKELY = "most-likely"
    MOST_UNCERTAIN = "most-uncertain"


class UsageStats:
    """Views and downloads per dataset; unknown datasets count as (0, 0)."""

    def __init__(self, counts: dict[str, tuple[int, int]] | None = None):
        self._counts = dict(counts or {})

    def views(self, dataset_id: str) -> int:
        return self._counts.get(dataset_id, (0, 0))[0]

    def downloads(self, dataset_id: str) -> int:
        return self._counts.get(dataset_id, (0, 0))[1]

    def total(self, dataset_id: str) -> int:
        v, d = self._counts.get(dataset_id, (0, 0))
        return v + d


@dataclass(frozen=True)
class RankingConfig:
    alpha: float = 0.5
    strategy: Strategy = Strategy.MOST_LIKELY
    epsilon: float = 1e-6
    benefit_semantics: str = "union"  # or "intersection"

    def __post_init__(self) -> None:
        if not 0.0 <= self.alpha <= 1.0:
            raise ValueError("alpha must lie in [0, 1]")
        if self.epsilon <= 0.0:
            raise ValueError("epsilon must be positive")
        if self.benefit_semantics not in ("union", "intersection"):
            raise ValueError("benefit_semantics must be 'union' or 'intersection'")


@dataclass(frozen=True)
class RankedHypothesis:
    hyp_id: str
    category: str
    datasets: tuple[str, ...]
    probability: float
    probability_strategy: float
    cost: float
    benefit: float
    probability_norm: float
    cost_norm: float
    benefit_norm: float
    score: float
    rank: int


def probability(h: Hypothesis) -> float:
    """Mean confidence over all edges of the hypothesis, regardless of kind."""
    if not h.edges:
        raise ValueError(f"{h.hyp_id}: cannot score a hypothesis without edges")
    return sum(e.confidence for e in h.edges) / len(h.edges)


def strategy_transform(p: float, strategy: Strategy) -> float:
    """Identity for most-likely; a peak at 0.5 for most-uncertain."""
    if strategy is Strategy.MOST_LIKELY:
        return p
    return 1.0 - 2.0 * abs(p - 0.5)


def cost(h: Hypothesis, corpus: Corpus, cfg: RankingConfig) -> float:
    """alpha * edge count + (1 - alpha) * total attribute count of the members.

    Dataset size is taken as attribute count: the schema context a verifier
    has to read. Groups of more than two datasets sum over all members.
    """
    context = sum(corpus.dataset(d).attribute_count for d in h.datasets)
    return cfg.alpha * len(h.edges) + (1.0 - cfg.alpha) * context


def relevance(dataset_id: str, usage: UsageStats) -> float:
    """Usage-derived dataset relevance: 1 + ln(1 + views + downloads)."""
    return 1.0 + math.log1p(usage.total(dataset_id))


def _connectivity(
    h: Hypothesis, all_hyps: list[Hypothesis], semantics: str
) -> int:
    members = set(h.datasets)
    count = 0
    for other in all_hyps:
        if other.hyp_id == h.hyp_id:
            continue
        others = set(other.datasets)
        if semantics == "union":
            if members & others:
                count += 1
        else:
            if members <= others:
                count += 1
    return count


def benefit(
    h: Hypothesis,
    all_hyps: list[Hypothesis],
    usage: UsageStats | None = None,
    semantics: str = "union",
) -> float:
    """Hypothesis connectivity times the product of member relevances.

    Connectivity counts the other hypotheses touching at least one of this
    hypothesis's datasets ("union"), or containing all of them
    ("intersection"). Without usage stats every relevance is 1.0 and the
    benefit reduces to pure connectivity.
    """
    usage = usage or UsageStats()
    product = 1.0
    for d in h.datasets:
        product *= relevance(d, usage)
    return _connectivity(h, all_hyps, semantics) * product


def _minmax(values: list[float]) -> list[float]:
    lo, hi = min(values), max(values)
    if hi == lo:
        return [1.0] * len(values)
    return [(v - lo) / (hi - lo) for v in values]


def rank(
    hyps: list[Hypothesis],
    corpus: Corpus,
    usage: UsageStats | None = None,
    cfg: RankingConfig | None = None,
) -> list[RankedHypothesis]:
    """Score and order hypotheses; ties break on ascending hypothesis id.

    score = p_hat * b_hat * (1 - v_hat + eps) / (1 + eps), each factor
    min-max normalized over the input set (a constant factor normalizes to
    all ones). Ranks are assigned 1..n by descending score.
    """
    if not hyps:
        return []
    cfg = cfg or RankingConfig()
    usage = usage or UsageStats()

    # connectivity via a dataset -> hypothesis index instead of a full scan
    by_dataset: dict[str, set[str]] = {}
    for h in hyps:
        for d in h.datasets:
            by_dataset.setdefault(d, set()).add(h.hyp_id)

    probs, strat, costs, benefits = [], [], [], []
    for h in hyps:
        p = probability(h)
        probs.append(p)
        strat.append(strategy_transform(p, cfg.strategy))
        costs.append(cost(h, corpus, cfg))
        if cfg.benefit_semantics == "union":
            touching = set()
            for d in h.datasets:
                touching |= by_dataset[d]
            touching.discard(h.hyp_id)
            conn = len(touching)
        else:
            containing = set.intersection(*(by_dataset[d] for d in h.datasets))
            containing.discard(h.hyp_id)
            conn = len(containing)
        product = 1.0
        for d in h.datasets:
            product *= relevance(d, usage)
        benefits.append(conn * product)

    p_hat = _minmax(strat)
    v_hat = _minmax(costs)
    b_hat = _minmax(benefits)
    eps = cfg.epsilon
    scores = [
        ps * bs * (1.0 - vs + eps) / (1.0 + eps)
        for ps, vs, bs in zip(p_hat, v_hat, b_hat)
    ]

    order = sorted(range(len(hyps)), key=lambda i: (-scores[i], hyps[i].hyp_id))
    ranked = []
    for position, i in enumerate(order, start=1):
        h = hyps[i]
        ranked.append(
            RankedHypothesis(
                hyp_id=h.hyp_id,
                category=h.category.value,
                datasets=h.datasets,
                probability=probs[i],
                probability_strategy=strat[i],
                cost=costs[i],
                benefit=benefits[i],
                probability_norm=p_hat[i],
                cost_norm=v_hat[i],
                benefit_norm=b_hat[i],
                score=scores[i],
                rank=position,
            )
        )
    return ranked


@dataclass(frozen=True)
class DistReport:
    """Factor distributions, each series sorted descending independently."""

    rows: tuple[tuple[int, float, float, float, float], ...]


def distribution_report(ranked: list[RankedHypothesis]) -> DistReport:
    """Columns of p_hat, v_hat, b_hat, and score, each ordered by own value."""
    p = sorted((r.probability_norm for r in ranked), reverse=True)
    v = sorted((r.cost_norm for r in ranked), reverse=True)
    b = sorted((r.benefit_norm for r in ranked), reverse=True)
    s = sorted((r.score for r in ranked), reverse=True)
    rows = tuple(
        (i + 1, p[i], v[i], b[i], s[i]) for i in range(len(ranked))
    )
    return DistReport(rows)
