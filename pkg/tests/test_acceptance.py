"""Acceptance suite: one test per acceptance criterion, each printing a
PASS line with its measured numbers when it holds.

The data-dependent criteria run on the bundled simulated snapshot (the
pinned default seeds); real re-collected snapshots are not reachable from
the build environment. The suite exercises only the Python package and
its HTTP service; no dashboard build is involved.
"""

import itertools
import time
from fractions import Fraction

import numpy as np
import pytest
from fastapi.testclient import TestClient

from rsv_sentinel.artifacts import load_artifact, save_artifact
from rsv_sentinel.analysis import correlation_matrix, pearson
from rsv_sentinel.errors import CorruptArtifact, UnsupportedVersion
from rsv_sentinel.evaluation import (
    DEFAULT_GRIDS,
    confusion,
    cross_validate,
    kfold_stratified,
    macro_f1,
    prf1,
    roc_auc,
)
from rsv_sentinel.learners import (
    BoostingParams,
    ForestParams,
    TreeParams,
    best_split,
    fit_boosting,
    fit_forest,
    grow_tree,
    predict_class,
    staged_log_loss,
)
from rsv_sentinel.panel import (
    RiskClass,
    classify_rate,
    default_schema,
    panel_to_xy,
    stratified_split,
)
from rsv_sentinel.service import create_app
from tests.conftest import SPLIT_SEED
from tests.test_tree import oracle_best_split, random_dataset

SCHEMA = default_schema()


def _report(name, detail=""):
    print(f"ACCEPTANCE PASS: {name}" + (f" ({detail})" if detail else ""))


# -- 1. metric oracle suite ----------------------------------------------------

def _mann_whitney(scores, labels):
    pos = scores[labels == 1]
    neg = scores[labels == 0]
    wins = np.sum(pos[:, None] > neg[None, :]) \
        + 0.5 * np.sum(pos[:, None] == neg[None, :])
    return float(wins) / (len(pos) * len(neg))


def test_metric_oracle_suite():
    rng = np.random.default_rng(20240601)
    started = time.time()
    for _ in range(1000):
        n = int(rng.integers(2, 201))
        truth = rng.integers(0, 3, size=n)
        pred = rng.integers(0, 3, size=n)
        matrix = confusion(truth, pred)
        assert matrix.total == n
        assert matrix.accuracy() == float(np.mean(truth == pred))
        for k in range(3):
            tp = int(np.sum((truth == k) & (pred == k)))
            fp = int(np.sum((truth != k) & (pred == k)))
            fn = int(np.sum((truth == k) & (pred != k)))
            got = prf1(matrix, k)
            assert got["precision"] == (tp / (tp + fp) if tp + fp else 0.0)
            assert got["recall"] == (tp / (tp + fn) if tp + fn else 0.0)
            expected_f1 = (2 * got["precision"] * got["recall"]
                           / (got["precision"] + got["recall"])
                           if got["precision"] + got["recall"] else 0.0)
            assert got["f1"] == expected_f1
        labels = rng.integers(0, 2, size=n)
        if labels.min() == labels.max():
            labels[0] = 1 - labels[0]
        scores = np.round(rng.random(size=n), 2)
        auc = roc_auc(scores, labels, RiskClass.ALERT).auc
        assert abs(auc - _mann_whitney(scores, labels)) <= 1e-12
    elapsed = time.time() - started
    assert elapsed < 10.0
    _report("metric oracle suite", f"1000 instances in {elapsed:.1f}s")


# -- 2. Eq. 1-3 spot values -------------------------------------------------------

def test_equation_spot_values():
    counts = np.zeros((3, 3), dtype=np.int64)
    counts[0, 0] = 8   # TP
    counts[1, 0] = 2   # FP (truth Alert predicted LowRisk)
    counts[0, 1] = 4   # FN
    got = prf1(confusion_from_counts(counts), RiskClass.LOW_RISK)
    assert got["precision"] == 0.8
    assert got["recall"] == float(Fraction(2, 3))
    assert abs(got["f1"] - Fraction(8, 11)) < 1e-12

    empty = np.zeros((3, 3), dtype=np.int64)
    empty[2, 2] = 3
    degenerate = prf1(confusion_from_counts(empty), RiskClass.LOW_RISK)
    assert degenerate == {"precision": 0.0, "recall": 0.0, "f1": 0.0}
    _report("Eq. 1-3 spot values", "precision 0.8, recall 2/3, F1 8/11")


def confusion_from_counts(counts):
    from rsv_sentinel.evaluation import ConfusionMatrix
    return ConfusionMatrix(counts)


# -- 3. split-search oracle ----------------------------------------------------------

def test_split_search_oracle():
    rng = np.random.default_rng(77)
    started = time.time()
    agreements = 0
    for trial in range(500):
        X, y = random_dataset(rng, integer_grid=trial % 2 == 0)
        mine = best_split(X, y)
        ref = oracle_best_split(X, y)
        if ref is None:
            assert mine is None
        else:
            assert mine is not None
            assert mine[0] == ref[0] and mine[1] == ref[1]
            agreements += 1
    elapsed = time.time() - started
    assert elapsed < 30.0
    _report("split-search oracle",
            f"500 datasets, {agreements} splits, tie-breaks exact, "
            f"{elapsed:.1f}s")


# -- 4. ensemble reductions ------------------------------------------------------------

def test_ensemble_reductions():
    rng = np.random.default_rng(500)
    for trial in range(100):
        n = int(rng.integers(10, 60))
        p = int(rng.integers(2, 6))
        X = rng.normal(size=(n, p))
        y = rng.integers(0, 3, size=n).astype(np.int64)
        forest = fit_forest(X, y, ForestParams(n_trees=1, bootstrap=False,
                                               mtry=p, seed=trial))
        cart = grow_tree(X, y, TreeParams())
        q = rng.normal(size=(30, p))
        assert np.array_equal(forest.predict_proba(q), cart.predict_proba(q))

    X = rng.normal(size=(90, 4))
    y = rng.integers(0, 3, size=90).astype(np.int64)
    priors = np.bincount(y, minlength=3) / len(y)
    model = fit_boosting(X, y, BoostingParams(n_stages=0))
    assert np.allclose(model.predict_proba(X), priors, atol=0)

    descent_checked = 0
    for seed in range(10):
        rng2 = np.random.default_rng(seed)
        n = int(rng2.integers(20, 120))
        X = rng2.normal(size=(n, 5))
        y = np.digitize(X[:, 0] + 0.5 * rng2.normal(size=n),
                        [-0.6, 0.7]).astype(np.int64)
        if len(np.unique(y)) < 2:
            continue
        model = fit_boosting(X, y, BoostingParams(n_stages=25))
        curve = staged_log_loss(model, X, y)
        assert all(b <= a + 1e-12 for a, b in zip(curve, curve[1:]))
        descent_checked += 1
    assert descent_checked >= 8
    _report("ensemble reductions",
            "100 forest=CART identities, priors exact, "
            f"log-loss non-increasing on {descent_checked} datasets")


# -- 5. classification thresholds -------------------------------------------------------

def test_classification_thresholds():
    expected = [RiskClass.LOW_RISK, RiskClass.LOW_RISK, RiskClass.ALERT,
                RiskClass.ALERT, RiskClass.EPIDEMIC]
    got = [classify_rate(r) for r in (0.0, 5.0, 5.0001, 19.999, 20.0)]
    assert got == expected
    rates = np.sort(np.random.default_rng(5).uniform(0, 100, size=10_000))
    classes = [classify_rate(r) for r in rates]
    assert all(a <= b for a, b in zip(classes, classes[1:]))
    _report("classification thresholds",
            "boundary set exact, monotone on 10k rates")


# -- 6. stratification -------------------------------------------------------------------

def _round_half_up(x):
    import math
    return int(math.floor(x + 0.5))


def test_stratification_properties(panel_rows, split):
    from rsv_sentinel.panel import WeeklyPanelRow
    from rsv_sentinel.weeks import EpiWeek

    rng = np.random.default_rng(123)
    rates_for = {0: 1.0, 1: 10.0, 2: 30.0}
    for trial in range(100):
        counts = {k: int(rng.integers(2, 60)) for k in range(3)}
        rows = []
        week = EpiWeek(2023, 1)
        for cls, n in counts.items():
            for _ in range(n):
                rows.append(WeeklyPanelRow(
                    "SS", week, rates_for[cls], RiskClass(cls),
                    {name: 0.0 for name in SCHEMA.names}))
                week = week.next()
        pair = stratified_split(rows, 0.8, seed=trial)
        for cls, n in counts.items():
            train_k = sum(1 for r in pair.train if int(r.label) == cls)
            assert abs(train_k - _round_half_up(0.8 * n)) <= 1
            assert abs((n - train_k)
                       - (n - _round_half_up(0.8 * n))) <= 1

        y = np.repeat(list(counts), list(counts.values()))
        if min(counts.values()) >= 3:
            folds = kfold_stratified(y, 3, seed=trial)
            for cls in counts:
                per_fold = [int(np.sum(y[f] == cls)) for f in folds]
                assert max(per_fold) - min(per_fold) <= 1

    # faithful snapshot: split arithmetic exact, class mix near Table 4
    table4_train = {"LowRisk": 59.7, "Alert": 19.3, "Epidemic": 20.9}
    table4_test = {"LowRisk": 60.0, "Alert": 19.1, "Epidemic": 21.0}
    n_by_class = {cls: sum(1 for r in panel_rows if r.label == cls)
                  for cls in RiskClass}
    detail = []
    for subset, reference in ((split.train, table4_train),
                              (split.test, table4_test)):
        total = len(subset)
        for cls in RiskClass:
            count = sum(1 for r in subset if r.label == cls)
            if subset is split.train:
                assert abs(count - _round_half_up(0.8 * n_by_class[cls])) <= 1
            share = 100.0 * count / total
            assert abs(share - reference[cls.label]) <= 3.0
            detail.append(f"{cls.label} {share:.1f}")
    _report("stratification",
            "100 random panels within one sample per class; snapshot "
            "train/test mix " + ", ".join(detail))


# -- 7. Table 5 band reproduction ----------------------------------------------------------

def test_table5_bands(trained):
    rf = trained["reports"]["forest"]
    cart = trained["reports"]["cart"]
    boost = trained["reports"]["boosting"]
    assert rf.accuracy >= 0.75
    assert rf.macro_f1 >= 0.70
    assert rf.auc[0] >= 0.90
    assert rf.auc[2] >= 0.90
    assert rf.accuracy >= cart.accuracy
    assert trained["elapsed"] < 120.0
    _report("Table 5 bands",
            f"CART {cart.accuracy:.3f} / Boost {boost.accuracy:.3f} / "
            f"RF {rf.accuracy:.3f}, RF F1 {rf.macro_f1:.3f}, "
            f"AUC L {rf.auc[0]:.3f} A {rf.auc[1]:.3f} E {rf.auc[2]:.3f}, "
            f"train+eval {trained['elapsed']:.0f}s")


# -- 8. qualitative structure ------------------------------------------------------------

def test_qualitative_structure(panel_rows, ingested, trained):
    for kind in ("cart", "forest", "boosting"):
        assert trained["reports"][kind].importance.top(1) == ["WVAL"]

    matrix = correlation_matrix(panel_rows, ["WVAL", "T2M"])
    corr_wval = matrix.get("Rate", "WVAL")
    corr_t2m = matrix.get("Rate", "T2M")
    assert corr_wval > 0.4
    assert corr_t2m < -0.3

    tblock = ("T2M", "T2MDEW", "T2MWET", "TS")
    keys = [k for k in sorted(ingested.meteo_weekly)
            if all(v in ingested.meteo_weekly[k] for v in tblock)]
    arrays = {v: np.array([ingested.meteo_weekly[k][v] for k in keys])
              for v in tblock}
    min_pair = min(pearson(arrays[a], arrays[b])
                   for a, b in itertools.combinations(tblock, 2))
    assert min_pair >= 0.85

    cart_model = trained["models"]["cart"].model
    root_feature = SCHEMA.names[cart_model.root.feature_index]
    assert root_feature == "WVAL"
    _report("qualitative structure",
            f"corr(Rate,WVAL)={corr_wval:.2f}, corr(Rate,T2M)={corr_t2m:.2f}, "
            f"temp block min r={min_pair:.2f}, CART root={root_feature}")


# -- 9. high-altitude reanalysis -----------------------------------------------------------

def test_high_altitude_reanalysis(trained, panel_rows_excluded):
    full_cart = trained["models"]["cart"].model
    ps_index = SCHEMA.index("PS")
    assert ps_index in full_cart.tree.features_used()

    pair = stratified_split(panel_rows_excluded, 0.8, seed=SPLIT_SEED)
    X, y = panel_to_xy(pair.train)
    rerun = cross_validate("cart", DEFAULT_GRIDS["cart"], X, y, k=10,
                           seed=SPLIT_SEED, schema=SCHEMA)
    excluded_features = {SCHEMA.names[f]
                         for f in rerun.model.tree.features_used()}
    assert "PS" not in excluded_features
    _report("high-altitude reanalysis",
            "all-states CART splits on PS, CO/NM/UT-excluded CART does not "
            f"(uses {sorted(excluded_features)})")


# -- 10. artifact round trip ------------------------------------------------------------------

def test_artifact_round_trip(trained, tmp_path):
    model = trained["models"]["forest"].model
    path = tmp_path / "forest.json"
    save_artifact(model, "forest", SCHEMA, {"split_seed": SPLIT_SEED}, path)
    loaded = load_artifact(path)
    rng = np.random.default_rng(99)
    q = rng.normal(loc=5.0, scale=8.0, size=(1000, 15))
    before = model.predict_proba(q)
    after = loaded.model.predict_proba(q)
    max_delta = float(np.max(np.abs(before - after)))
    assert max_delta <= 1e-12

    corrupted = tmp_path / "corrupt.json"
    corrupted.write_bytes(path.read_bytes()[:1000])
    with pytest.raises(CorruptArtifact):
        load_artifact(corrupted)
    import json as json_module
    doc = json_module.loads(path.read_text())
    doc["format_version"] = 99
    mismatched = tmp_path / "version.json"
    mismatched.write_text(json_module.dumps(doc))
    with pytest.raises(UnsupportedVersion):
        load_artifact(mismatched)
    _report("artifact round trip",
            f"1000 vectors, max |delta| = {max_delta:.1e}, "
            "corrupt and version errors raised")


# -- 11. service contract ----------------------------------------------------------------------

def test_service_contract(trained, panel_rows, tmp_path):
    model = trained["models"]["forest"].model
    path = tmp_path / "serve.json"
    save_artifact(model, "forest", SCHEMA, {}, path)
    artifact = load_artifact(path)
    client = TestClient(create_app(artifact, panel_rows))

    ranges = client.get("/schema").json()["ranges"]
    states = client.get("/states").json()["states"]
    rng = np.random.default_rng(314)
    agreements = 0
    for _ in range(500):
        features = {}
        for name in SCHEMA.names:
            lo, hi = ranges[name]["min"], ranges[name]["max"]
            features[name] = float(rng.uniform(lo, hi))
        features["rsv_season"] = float(rng.integers(0, 2))
        state = states[int(rng.integers(0, len(states)))]
        response = client.post("/predict",
                               json={"state": state, "features": features})
        assert response.status_code == 200
        vector = [features[n] for n in SCHEMA.names]
        expected = predict_class(model, vector).label
        assert response.json()["risk_class"] == expected
        agreements += 1

    missing = {n: 1.0 for n in SCHEMA.names if n not in ("PS", "WVAL")}
    bad = client.post("/predict", json={"state": states[0],
                                        "features": missing})
    assert bad.status_code == 422
    assert "PS" in bad.json()["detail"] and "WVAL" in bad.json()["detail"]
    _report("service contract",
            f"{agreements}/500 exact agreements through HTTP, 422 lists "
            "missing field names")
