"""Monte Carlo calibration of the paired tests and the Wald interval.

A scenario fixes the joint distribution of (control, study) outcomes on
ground-truth positive teeth. Each replicate draws the number of positives,
fills a matched sample table from that distribution and runs the tests.
Replicates use independent generators spawned from one seed sequence, so a
summary is bit-identical for a given seed regardless of execution order.
"""

from __future__ import annotations

import json
import math
import sys
from dataclasses import asdict, dataclass
from functools import lru_cache
from pathlib import Path

import numpy as np

from .annotations import AnomalyType
from .distributions import binomial_cdf, binomial_log_pmf
from .matching import Endpoint, MatchedSampleTable
from .paired_tests import Direction, TestConfig, binomial_test, critical_value, mcnemar_test, wald_ci

if sys.version_info >= (3, 11):
    import tomllib
else:  # pragma: no cover
    import tomli as tomllib

__all__ = ["SimScenario", "simulate_mst", "calibrate", "analytic_power", "load_scenarios"]

_ANOMALY = AnomalyType.CARIES  # label only; simulations are anomaly-agnostic


@dataclass(frozen=True)
class SimScenario:
    """Per-positive-tooth joint probabilities; ``p_bad`` is the remainder."""

    name: str = "scenario"
    n_teeth: int = 1346
    prevalence: float = 0.1
    p_good: float = 0.6
    p_profit: float = 0.1
    p_loss: float = 0.1
    replications: int = 10_000
    seed: int = 0

    def __post_init__(self):
        if self.n_teeth < 1:
            raise ValueError("n_teeth must be >= 1")
        if not 0.0 < self.prevalence <= 1.0:
            raise ValueError("prevalence must be in (0, 1]")
        probs = (self.p_good, self.p_profit, self.p_loss)
        if any(p < 0 for p in probs) or sum(probs) > 1.0 + 1e-12:
            raise ValueError("cell probabilities must be non-negative and sum to at most 1")
        if self.replications < 1:
            raise ValueError("replications must be >= 1")

    @property
    def p_bad(self) -> float:
        return max(0.0, 1.0 - self.p_good - self.p_profit - self.p_loss)

    @property
    def is_null(self) -> bool:
        return math.isclose(self.p_profit, self.p_loss)

    @property
    def true_study_sensitivity(self) -> float:
        return self.p_good + self.p_profit

    @property
    def p1(self) -> float:
        """Probability that a discordant pair is a profit."""
        d = self.p_profit + self.p_loss
        return self.p_profit / d if d > 0 else 0.5


def simulate_mst(scenario: SimScenario, rng: np.random.Generator) -> MatchedSampleTable:
    positives = int(rng.binomial(scenario.n_teeth, scenario.prevalence))
    probs = [scenario.p_good, scenario.p_profit, scenario.p_loss, scenario.p_bad]
    g, rho, lam, b = (int(v) for v in rng.multinomial(positives, np.asarray(probs) / sum(probs)))
    return MatchedSampleTable(_ANOMALY, Endpoint.SENSITIVITY, g, rho, lam, b)


@lru_cache(maxsize=None)
def _decisions(rho: int, lam: int, cfg: TestConfig) -> tuple[bool, bool, bool]:
    """(exact test rejects, critical region reached, McNemar rejects), right-sided."""
    n = rho + lam
    if n == 0 or rho <= lam:
        return False, False, False
    mst = MatchedSampleTable(_ANOMALY, Endpoint.SENSITIVITY, 0, rho, lam, 0)
    bt = binomial_test(mst, cfg)
    mc = mcnemar_test(mst, cfg)
    right = bt.direction is Direction.RIGHT
    return (right and bt.reject_h0, right and rho >= bt.x_alpha,
            mc.direction is Direction.RIGHT and mc.reject_h0)


def analytic_power(scenario: SimScenario, cfg: TestConfig = TestConfig()) -> float:
    """Probability that profit lands in the critical region [x_alpha, n].

    The number of discordant pairs is itself random,
    n ~ B(n_teeth, prevalence * (p_profit + p_loss)), so the per-n power
    1 - e_II is averaged over that distribution.
    """
    q = scenario.prevalence * (scenario.p_profit + scenario.p_loss)
    if q <= 0.0:
        return 0.0
    if q >= 1.0:
        weights = {scenario.n_teeth: 1.0}
    else:
        weights = {n: math.exp(binomial_log_pmf(n, scenario.n_teeth, q))
                   for n in range(1, scenario.n_teeth + 1)}
    total = 0.0
    for n, w in weights.items():
        if w < 1e-16:
            continue
        x_alpha = critical_value(n, cfg.alpha_i)
        if x_alpha > n:
            continue
        total += w * (1.0 - binomial_cdf(x_alpha, n, scenario.p1))
    return total


def _band(rate: float, reps: int, z: float = 2.5758) -> float:
    return z * math.sqrt(rate * (1.0 - rate) / reps)


def calibrate(scenario: SimScenario, cfg: TestConfig = TestConfig()) -> dict:
    """Rejection rates, power and interval coverage over all replicates.

    Rejections only count in the hypothesised direction (profit > loss).
    Under a null scenario the rates are Type-I error estimates; otherwise
    the critical-region rate is the empirical power, the quantity the
    analytic power formula describes.
    """
    children = np.random.SeedSequence(scenario.seed).spawn(scenario.replications)
    truth = scenario.true_study_sensitivity
    exact = region = mcn = covered = with_ci = 0
    discordant = 0
    for child in children:
        mst = simulate_mst(scenario, np.random.default_rng(child))
        e, r, m = _decisions(mst.profit, mst.loss, cfg)
        exact += e
        region += r
        mcn += m
        discordant += mst.discordant
        positives = mst.total
        if positives > 0:
            res = wald_ci((mst.good + mst.profit) / positives, positives, cfg.confidence)
            with_ci += 1
            covered += res.ci[0] <= truth <= res.ci[1]
    reps = scenario.replications
    out = {
        "scenario": asdict(scenario),
        "alpha_i": cfg.alpha_i,
        "confidence": cfg.confidence,
        "null": scenario.is_null,
        "mean_discordant": discordant / reps,
        "binomial_rejection_rate": exact / reps,
        "critical_region_rate": region / reps,
        "mcnemar_rejection_rate": mcn / reps,
        "ci_coverage": covered / with_ci if with_ci else None,
    }
    if scenario.is_null:
        out["type_I_rate"] = out["binomial_rejection_rate"]
        out["type_I_band_99"] = [cfg.alpha_i - _band(cfg.alpha_i, reps), cfg.alpha_i + _band(cfg.alpha_i, reps)]
    else:
        power = analytic_power(scenario, cfg)
        out["analytic_power"] = power
        out["empirical_power"] = out["critical_region_rate"]
        out["power_difference"] = out["empirical_power"] - power
    return out


def _scenario_from_mapping(d: dict, default_name: str) -> SimScenario:
    known = set(SimScenario.__dataclass_fields__)
    unknown = set(d) - known
    if unknown:
        raise ValueError(f"unknown scenario keys {sorted(unknown)}")
    return SimScenario(**{"name": default_name, **d})


def load_scenarios(path: str | Path) -> list[SimScenario]:
    """Read scenarios from TOML or JSON.

    Either a single scenario at top level or a list under ``scenario``
    (``[[scenario]]`` tables in TOML).
    """
    path = Path(path)
    raw = path.read_bytes()
    data = json.loads(raw) if path.suffix.lower() == ".json" else tomllib.loads(raw.decode("utf-8"))
    if isinstance(data, list):
        items = data
    elif "scenario" in data:
        items = data["scenario"] if isinstance(data["scenario"], list) else [data["scenario"]]
    else:
        items = [data]
    return [_scenario_from_mapping(dict(item), f"{path.stem}[{i}]") for i, item in enumerate(items)]
