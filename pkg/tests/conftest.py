import time

import numpy as np
import pytest

from rsv_sentinel.evaluation import DEFAULT_GRIDS, cross_validate, evaluate_model
from rsv_sentinel.ingest import ingest_snapshot
from rsv_sentinel.learners import BoostingParams, fit_boosting, grow_tree
from rsv_sentinel.panel import (
    build_panel,
    default_schema,
    panel_to_xy,
    stratified_split,
)
from rsv_sentinel.simdata import (
    DEFAULT_ROSTER,
    HIGH_ALTITUDE,
    SimulationConfig,
    generate_snapshot,
)

SNAPSHOT_SEED = 20240611
SPLIT_SEED = 42


@pytest.fixture(scope="session")
def snapshot(tmp_path_factory):
    out = tmp_path_factory.mktemp("snapshot")
    return generate_snapshot(out, SimulationConfig(seed=SNAPSHOT_SEED))


@pytest.fixture(scope="session")
def ingested(snapshot):
    return ingest_snapshot(snapshot.paths, DEFAULT_ROSTER)


@pytest.fixture(scope="session")
def panel_rows(ingested):
    rows, _ = build_panel(ingested.rates, ingested.wastewater,
                          ingested.meteo_weekly, ingested.air_weekly,
                          DEFAULT_ROSTER)
    return rows


@pytest.fixture(scope="session")
def panel_rows_excluded(ingested):
    rows, _ = build_panel(ingested.rates, ingested.wastewater,
                          ingested.meteo_weekly, ingested.air_weekly,
                          DEFAULT_ROSTER, exclude_states=HIGH_ALTITUDE)
    return rows


@pytest.fixture(scope="session")
def split(panel_rows):
    return stratified_split(panel_rows, 0.8, seed=SPLIT_SEED)


@pytest.fixture(scope="session")
def trained(split):
    """CV-tuned cart/forest/boosting plus reports, with the wall time of
    the train+evaluate block (kernels warmed beforehand)."""
    X_train, y_train = panel_to_xy(split.train)
    X_test, y_test = panel_to_xy(split.test)
    schema = default_schema()

    # warm the JIT kernels so the timing below measures the pipeline
    warm = np.random.default_rng(0).normal(size=(40, 15))
    warm_y = (warm[:, 0] > 0).astype(np.int64)
    grow_tree(warm, warm_y)
    fit_boosting(warm, warm_y, BoostingParams(n_stages=1))

    started = time.time()
    models = {}
    reports = {}
    for kind in ("cart", "forest", "boosting"):
        cv = cross_validate(kind, DEFAULT_GRIDS[kind], X_train, y_train,
                            k=10, seed=SPLIT_SEED, schema=schema)
        models[kind] = cv
        reports[kind] = evaluate_model(cv.model, kind, kind, X_test, y_test)
    elapsed = time.time() - started
    return {
        "models": models,
        "reports": reports,
        "elapsed": elapsed,
        "X_test": X_test,
        "y_test": y_test,
        "X_train": X_train,
        "y_train": y_train,
    }
