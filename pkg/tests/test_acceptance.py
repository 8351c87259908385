"""Acceptance criteria 1-9, one PASS/FAIL line each.

Each test records its verdict in ``RESULTS`` and prints it; the terminal
summary (see conftest) aggregates the parts of a criterion into one line.
"""

import math
import random

import pytest

from pairedval.analysis import analyze
from pairedval.annotations import AnomalyType, Arm
from pairedval.calibration import SimScenario, calibrate
from pairedval.distributions import binomial_cdf, binomial_sf
from pairedval.fixtures import (
    PRINTED_AUC,
    PRINTED_AUC_DIFF,
    PRINTED_DETECTOR,
    PRINTED_ENDPOINT_AVERAGE,
    PRINTED_ENDPOINTS,
    PRINTED_SENS_TESTS,
    PRINTED_SPEC_TESTS,
    synthetic_dataset,
)
from pairedval.lroc import auc_stats, build_lroc, trapezoid_auc
from pairedval.matching import THRESHOLDS, classify_teeth
from pairedval.paired_tests import f_beta

from .test_distributions import exact_tails, rel_close
from .test_matching import APICAL, CARIES, micro_dataset, oracle_labels

A = AnomalyType
RESULTS: dict[int, dict[str, tuple[bool, str]]] = {}


def verdict(criterion, part, ok, detail):
    RESULTS.setdefault(criterion, {})[part] = (ok, detail)
    print(f"{'PASS' if ok else 'FAIL'} criterion {criterion} [{part}]: {detail}")
    return ok


def tally_misses(misses, total):
    return f"{total - len(misses)}/{total} within tolerance" + (f", off: {misses[:4]}" if misses else "")


@pytest.fixture(scope="module")
def analysis(paper):
    return analyze(paper)


# 1 ---------------------------------------------------------------------

def test_criterion_1_endpoints(analysis):
    misses, total = [], 0
    for row in analysis.rows:
        printed = PRINTED_ENDPOINTS[row.anomaly]
        e = row.endpoints
        for name, got, want in (("sens ctrl", e.sens_control, printed[0]), ("sens study", e.sens_study, printed[1]),
                                ("spec ctrl", e.spec_control, printed[3]), ("spec study", e.spec_study, printed[4])):
            total += 1
            if abs(100 * got.estimate - want) > 0.05:
                misses.append((row.anomaly.value, name, round(100 * got.estimate, 3), want))
    av = analysis.endpoint_average
    for name, got, want in (("sens ctrl", av.sens_control, PRINTED_ENDPOINT_AVERAGE[0]),
                            ("sens study", av.sens_study, PRINTED_ENDPOINT_AVERAGE[1]),
                            ("spec ctrl", av.spec_control, PRINTED_ENDPOINT_AVERAGE[3]),
                            ("spec study", av.spec_study, PRINTED_ENDPOINT_AVERAGE[4])):
        total += 1
        if abs(100 * got[0] - want) > 0.05:
            misses.append(("average", name, round(100 * got[0], 3), want))
    assert verdict(1, "endpoints", not misses, tally_misses(misses, total))


# 2 ---------------------------------------------------------------------

def test_criterion_2_wald_intervals(analysis):
    misses, total = [], 0
    for row in analysis.rows:
        printed = PRINTED_ENDPOINTS[row.anomaly]
        e = row.endpoints
        for name, got, want in (("sens ctrl", e.sens_control, printed[2][0]), ("sens study", e.sens_study, printed[2][1]),
                                ("spec ctrl", e.spec_control, printed[5][0]), ("spec study", e.spec_study, printed[5][1])):
            total += 1
            if any(abs(100 * g - w) > 0.1 for g, w in zip(got.ci, want)):
                misses.append((row.anomaly.value, name, [round(100 * g, 2) for g in got.ci], want))
    rc = analysis.row(A.ROOT_CANAL_DEFECT).endpoints.sens_study
    clipped = rc.ci[1] == 1.0
    ok = not misses and total == 24 and clipped
    assert verdict(2, "CIs", ok, tally_misses(misses, total) + f", root canal upper bound {100 * rc.ci[1]:g}")


# 3 ---------------------------------------------------------------------

def _tests(analysis, endpoint):
    printed = PRINTED_SENS_TESTS if endpoint == "sens" else PRINTED_SPEC_TESTS
    for row in analysis.rows:
        yield (row.anomaly.value, endpoint, printed[row.anomaly],
               getattr(row, f"mcnemar_{endpoint}"), getattr(row, f"binomial_{endpoint}"))


def test_criterion_3_mcnemar(analysis):
    misses, total = [], 0
    for name, ep, printed, mc, _ in [*_tests(analysis, "sens"), *_tests(analysis, "spec")]:
        total += 1
        if abs(mc.chi2 - printed[0]) > 0.05 or abs(100 * mc.p_one_sided - printed[1]) > 0.02:
            misses.append((name, ep, round(mc.chi2, 3), round(100 * mc.p_one_sided, 4), printed[:2]))
    assert verdict(3, "McNemar", not misses and total == 12, tally_misses(misses, total))


# 4 ---------------------------------------------------------------------

def test_criterion_4_binomial(analysis):
    misses, total = [], 0
    x_alphas = []
    for name, ep, printed, _, bt in [*_tests(analysis, "sens"), *_tests(analysis, "spec")]:
        total += 1
        x_alphas.append(bt.x_alpha)
        _, _, s_x, x_alpha, e_ii, power = printed
        if (abs(100 * bt.p_one_sided - s_x) > 0.02 or bt.x_alpha != x_alpha
                or abs(100 * bt.e_ii - e_ii) > 0.1 or abs(100 * bt.power - power) > 0.1):
            misses.append((name, ep))
    ok = not misses and x_alphas == [23, 10, 6, 43, 61, 38, 57, 24, 9, 31, 145, 18]
    assert verdict(4, "binomial", ok, tally_misses(misses, total) + f", x_alpha {x_alphas}")


# 5 ---------------------------------------------------------------------

@pytest.mark.xfail(strict=True, reason="four bounds miss by up to 0.008 when the two-decimal printed "
                                       "areas are used as exact inputs")
def test_criterion_5_auc_intervals(paper):
    misses, total = [], 0
    for anomaly, (a_c, a_s, ci_c, ci_s) in PRINTED_AUC.items():
        ac = paper[anomaly]
        for arm, a, want in (("control", a_c, ci_c), ("study", a_s, ci_s)):
            got = auc_stats(a, ac.positives, ac.negatives).ci
            for i, bound in enumerate(("lo", "hi")):
                total += 1
                if abs(got[i] - want[i]) > 0.005:
                    misses.append(f"{anomaly.value}/{arm}/{bound} {got[i]:.4f} vs {want[i]}")
    assert verdict(5, "AUC CIs", not misses, tally_misses(misses, total))


def test_criterion_5_z_and_p(analysis):
    z_miss, p_miss = [], []
    for row in analysis.rows:
        _, z, p = PRINTED_AUC_DIFF[row.anomaly]
        c = row.auc_comparison
        if abs(c.z_hat - z) > 0.5:
            z_miss.append((row.anomaly.value, round(c.z_hat, 2), z))
        if p > 0 and abs(math.log10(c.p_one_sided / p)) > 1:
            p_miss.append((row.anomaly.value, c.p_one_sided, p))
    zs = [round(r.auc_comparison.z_hat, 1) for r in analysis.rows]
    ok = not z_miss and not p_miss
    assert verdict(5, "z and p", ok, f"z {zs} ({6 - len(z_miss)}/6 within 0.5), "
                                     f"non-zero p {2 - len(p_miss)}/2 within one decade")


# 6 ---------------------------------------------------------------------

def test_criterion_6_cross_test(analysis):
    worst = 0.0
    for name, ep, _, mc, bt in [*_tests(analysis, "sens"), *_tests(analysis, "spec")]:
        worst = max(worst, abs(mc.p_one_sided - bt.p_one_sided))
    assert verdict(6, "McNemar vs exact", worst <= 0.005, f"max |difference| {100 * worst:.3f} pp on 12 tables")


# 7 ---------------------------------------------------------------------

def test_criterion_7_binomial_oracle():
    bad, total = 0, 0
    for p in (0.5, 0.1, 0.9, 7 / 13):
        for n in range(1, 101):
            sf, cdf = exact_tails(n, p)
            for x in range(n + 1):
                total += 2
                bad += not rel_close(binomial_sf(x, n, p), sf[x])
                bad += not rel_close(binomial_cdf(x, n, p), cdf[x])
    assert verdict(7, "binomial tails", bad == 0, f"{total - bad}/{total} agree to 1e-9 relative")


def test_criterion_7_classification_oracle():
    rng = random.Random(7)
    bad = 0
    for _ in range(1000):
        img = micro_dataset(rng)
        arm, anomaly = rng.choice(list(Arm)), rng.choice((CARIES, APICAL))
        k = rng.choice(THRESHOLDS)
        got = {t.tooth_id: t.label.value for t in classify_teeth(img, arm, anomaly, k)}
        bad += got != oracle_labels(img, arm, anomaly, k, 0.25)
    assert verdict(7, "classify_teeth", bad == 0, f"{1000 - bad}/1000 micro-datasets agree")


# 8 ---------------------------------------------------------------------

POWER_SCENARIOS = [
    SimScenario("few discordant", n_teeth=1346, prevalence=0.04, p_good=0.6, p_profit=0.225, p_loss=0.025, seed=11),
    SimScenario("moderate", n_teeth=1346, prevalence=0.12, p_good=0.6, p_profit=0.175, p_loss=0.075, seed=12),
    SimScenario("weak effect", n_teeth=1346, prevalence=0.25, p_good=0.55, p_profit=0.18, p_loss=0.12, seed=13),
]


@pytest.mark.slow
def test_criterion_8_type_i():
    out = calibrate(SimScenario("null", n_teeth=1346, prevalence=0.5, p_good=0.6, p_profit=0.1,
                                p_loss=0.1, replications=10_000, seed=1))
    rate = out["type_I_rate"]
    assert verdict(8, "Type-I", 0.035 <= rate <= 0.065, f"exact test {rate:.4f} at 1e4 replicates")


@pytest.mark.slow
def test_criterion_8_power():
    diffs = []
    for sc in POWER_SCENARIOS:
        out = calibrate(sc)
        diffs.append((sc.name, out["empirical_power"], out["analytic_power"]))
    ok = all(abs(e - a) <= 0.03 for _, e, a in diffs)
    detail = ", ".join(f"{n} {e:.3f} vs {a:.3f}" for n, e, a in diffs)
    assert verdict(8, "power", ok, detail)


@pytest.mark.slow
def test_criterion_8_coverage():
    out = calibrate(SimScenario("coverage", n_teeth=1346, prevalence=0.3, p_good=0.55, p_profit=0.15,
                                p_loss=0.1, replications=10_000, seed=21))
    cov = out["ci_coverage"]
    assert verdict(8, "Wald coverage", abs(cov - 0.95) <= 0.02, f"{cov:.4f}")


# 9 ---------------------------------------------------------------------

def test_criterion_9_f_beta():
    precision, sensitivity, f2 = PRINTED_DETECTOR
    got = f_beta(precision, sensitivity, 2)
    assert verdict(9, "F2", abs(got - f2) <= 0.005, f"{got:.4f} vs {f2}")


def test_criterion_9_curve_properties():
    ds = synthetic_dataset(seed=0)
    problems = []
    for anomaly in A:
        for arm in Arm:
            c = build_lroc(ds, arm, anomaly)
            fpr = [p.fpr for p in c.points]
            sens = [p.sens for p in c.points]
            line = c.polyline()
            manual = sum((x1 - x0) * (y0 + y1) / 2 for (x0, y0), (x1, y1) in zip(line, line[1:]))
            if fpr != sorted(fpr) or sens != sorted(sens):
                problems.append(f"{anomaly.value}/{arm.value} not monotone")
            if line[-1] != (1.0, sens[-1]) or c.auc > sens[-1] + 1e-12:
                problems.append(f"{anomaly.value}/{arm.value} not flat-extended")
            if abs(manual - c.auc) > 1e-12 or abs(trapezoid_auc(line) - c.auc) > 1e-12:
                problems.append(f"{anomaly.value}/{arm.value} area mismatch")
    assert verdict(9, "curves", not problems, f"{12 - len(problems)}/12 curves monotone, flat-extended, "
                                              "trapezoid-consistent")
