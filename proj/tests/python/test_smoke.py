import json
import os
import pathlib

import pytest

import warden

SOURCE_DIR = pathlib.Path(os.environ.get("WARDEN_SOURCE_DIR", pathlib.Path(__file__).resolve().parents[2]))
FIXTURE = SOURCE_DIR / "data" / "social_network_ads.csv"


def preview_rows():
    return [
        warden.CustomerRecord(15624510, warden.Gender.Male, 19, 19000, 0),
        warden.CustomerRecord(15810944, warden.Gender.Male, 35, 20000, 0),
        warden.CustomerRecord(15686575, warden.Gender.Female, 26, 43000, 0),
        warden.CustomerRecord(15603246, warden.Gender.Female, 27, 57000, 0),
        warden.CustomerRecord(15804002, warden.Gender.Male, 19, 76000, 0),
    ]


def test_csv_round_trip_is_canonical():
    text = warden.encode_csv(preview_rows())
    lines = text.splitlines()
    assert lines[0] == "User ID,Gender,Age,EstimatedSalary,Purchased"
    assert lines[1].startswith("15603246,")
    decoded = warden.decode_csv(text)
    assert sorted(preview_rows(), key=lambda r: r.user_id) == decoded
    assert json.loads(warden.encode_json(preview_rows()))[0]["user_id"] == 15603246


def test_invalid_record_raises_value_error():
    bad = warden.CustomerRecord(1, warden.Gender.Male, -3, 1000, 0)
    with pytest.raises(ValueError):
        bad.validate()
    with pytest.raises(warden.DecodeError):
        warden.decode_csv("not,a,header\n")


def test_warehouse_versions_and_fixture():
    wh = warden.Warehouse()
    entry = wh.upsert_record(preview_rows()[0])
    assert (entry.version, entry.kind) == (1, "insert")
    assert wh.upsert_record(preview_rows()[0]).kind == "update"
    assert [e.version for e in wh.changes_since(0)] == [1, 2]
    if FIXTURE.exists():
        fresh = warden.Warehouse()
        assert fresh.seed_from_fixture(str(FIXTURE)) == 400
        assert len(fresh.records()) == 400


def test_gini_and_small_tree():
    assert warden.gini([2, 2]) == pytest.approx(0.5)
    assert warden.gini([4, 0]) == 0.0
    tree = warden.build_tree([[1.0], [2.0], [10.0], [11.0]], [0, 0, 1, 1], ["Age"])
    assert tree.depth == 1
    assert tree.predict_all([[0.0], [6.0], [6.5], [12.0]]) == [0, 0, 1, 1]
    assert "Age <= 6.0" in tree.render()
    assert warden.DecisionTree.from_json(tree.to_json()).digest() == tree.digest()


def test_forest_is_deterministic():
    xs = [[float(i), float(i % 3)] for i in range(20)]
    ys = [int(i >= 10) for i in range(20)]
    a = warden.build_forest(xs, ys, n_trees=7, seed=3)
    b = warden.build_forest(xs, ys, n_trees=7, seed=3)
    assert a.n_trees == 7
    assert [t.digest() for t in a.trees] == [t.digest() for t in b.trees]
    assert a.predict_all(xs) == b.predict_all(xs)


def test_evaluation_helpers():
    cells = warden.confusion([0, 0, 1, 1], [0, 1, 1, 1])
    assert cells == [[1, 1], [0, 2]]
    rep = warden.report(cells)
    assert rep["accuracy"] == pytest.approx(0.75)
    assert "accuracy" in warden.render_report(cells)
    mae, mse, rmse = warden.errors_from_predictions([0, 0, 1, 1], [0, 1, 1, 1])
    assert (mae, mse, rmse) == (0.25, 0.25, 0.5)


def test_split_and_standardize():
    train, test = warden.train_test_split(400, 0.3, 0)
    assert len(test) == 120 and len(train) == 280
    assert sorted(train + test) == list(range(400))
    means, stds = warden.fit_standardizer([[20.0], [30.0]])
    assert means == [25.0] and stds == [5.0]
    assert warden.standardize([[20.0], [30.0]], means, stds) == [[-1.0], [1.0]]
    assert warden.discretize([[0.0], [5.0], [10.0]], 2) == [[0.0], [1.0], [1.0]]


@pytest.mark.skipif(not FIXTURE.exists(), reason="fixture missing")
def test_retrain_on_fixture():
    rows = warden.decode_csv(FIXTURE.read_text())
    X, y, names = warden.select_features(rows)
    assert names == ["Age", "EstimatedSalary"] and len(X) == len(y) == 400
    result = warden.retrain(rows)
    assert 0.0 <= result["report"]["accuracy"] <= 1.0
