import numpy as np
import pytest

from oracles import haversine_oracle_km
from tweetgeo.geo import City, CityTable, haversine_km
from tweetgeo.metrics import (Prediction, acc_at_161, acc_top5, accuracy,
                              calibration_bins, error_distances_km,
                              label_coords_from_table, median_error_km,
                              per_class_pr, ranked_top5, write_calibration,
                              write_metrics_summary, write_per_class_pr)

# longitude whose float64 haversine distance from (0,0) is exactly 161.0 km
LON_161 = 1.447907785529156


def P(true, ranked, prob=0.9, coords=(0.0, 0.0)):
    return Prediction(true_label=true, ranked_labels=list(ranked), top_prob=prob,
                      true_coords=coords)


def test_ranked_top5_orders_and_tie_breaks():
    probs = np.array([0.1, 0.4, 0.4, 0.05, 0.03, 0.02])
    assert ranked_top5(probs) == [1, 2, 0, 3, 4]
    assert ranked_top5(np.array([0.5, 0.5])) == [0, 1]


def test_accuracy_all_correct_and_fixture():
    preds = [P(i, [i, 9, 8, 7, 6]) for i in range(4)]
    assert accuracy(preds) == 1.0
    # hand-checked 10-prediction fixture: 6 of 10 correct
    fixture = [P(0, [0]), P(1, [1]), P(2, [0]), P(3, [3]), P(0, [1]),
               P(1, [1]), P(2, [2]), P(3, [0]), P(0, [0]), P(1, [2])]
    assert accuracy(fixture) == pytest.approx(0.6)


def test_acc_top5_counts_fifth_place():
    preds = [P(4, [0, 1, 2, 3, 4])]
    assert acc_top5(preds) == 1.0
    preds = [P(5, [0, 1, 2, 3, 4])]
    assert acc_top5(preds) == 0.0


def test_acc_top5_fixture_and_dominates_accuracy():
    fixture = [P(0, [1, 0]), P(0, [0, 1]), P(2, [1, 0]), P(1, [0, 2, 1])]
    assert acc_top5(fixture) == pytest.approx(3 / 4)
    assert accuracy(fixture) <= acc_top5(fixture)


def _three_city_coords():
    table = CityTable([
        City(1, "origin", 0.0, 0.0, "AA", 10),
        City(2, "far", 0.0, 1.8, "AA", 10),        # ~200 km from origin
        City(3, "boundary", 0.0, LON_161, "AA", 10),
    ])
    return table, label_coords_from_table([1, 2, 3], table)


def test_error_distances_and_acc161_boundary_inclusive():
    table, coords = _three_city_coords()
    preds = [
        P(0, [0], coords=(0.0, 0.09)),   # ~10 km
        P(0, [1], coords=(0.0, 0.0)),    # ~200 km
        P(0, [2], coords=(0.0, 0.0)),    # exactly 161.0 km
    ]
    d = error_distances_km(preds, coords)
    assert d[2] == 161.0
    assert d[0] == pytest.approx(haversine_oracle_km((0, 0.09), (0, 0)), rel=1e-9)
    assert acc_at_161(preds, coords) == pytest.approx(2 / 3)


def test_predicted_city_at_true_coords_is_hit():
    table, coords = _three_city_coords()
    preds = [P(0, [0], coords=(0.0, 0.0))]
    assert acc_at_161(preds, coords) == 1.0


def test_median_error_odd_and_even():
    coords = np.array([[0.0, 0.0]])
    km_deg = haversine_km((0.0, 0.0), (0.0, 1.0))
    mk = lambda deg: P(0, [0], coords=(0.0, deg))
    # distances {1, 2, 3} degrees-worth -> median = 2 degrees-worth
    preds = [mk(1.0), mk(2.0), mk(3.0)]
    assert median_error_km(preds, coords) == pytest.approx(2 * km_deg, rel=1e-9)
    # even count {1, 3} -> mean of middle two
    preds = [mk(1.0), mk(3.0)]
    assert median_error_km(preds, coords) == pytest.approx(2 * km_deg, rel=1e-9)


def test_per_class_pr_perfect_and_never_predicted():
    preds = [P(0, [0]), P(1, [1]), P(1, [1])]
    rows = per_class_pr(preds, 3)
    assert rows[0] == (0, 1.0, 1.0, 1)
    assert rows[1] == (1, 1.0, 1.0, 2)
    assert rows[2] == (2, 0.0, 0.0, 0)   # never predicted, no support


def test_per_class_pr_hand_confusion_matrix():
    # confusion (true x pred): [[2,1,0],[0,1,1],[1,0,2]]
    preds = (
        [P(0, [0])] * 2 + [P(0, [1])] +
        [P(1, [1])] + [P(1, [2])] +
        [P(2, [0])] + [P(2, [2])] * 2
    )
    rows = per_class_pr(preds, 3)
    assert rows[0] == (0, pytest.approx(2 / 3), pytest.approx(2 / 3), 3)
    assert rows[1] == (1, pytest.approx(1 / 2), pytest.approx(1 / 2), 2)
    assert rows[2] == (2, pytest.approx(2 / 3), pytest.approx(2 / 3), 3)


def test_calibration_all_high_confidence():
    preds = [P(0, [0], prob=0.95)] * 4
    rows = calibration_bins(preds)
    assert rows[-1] == (0.9, 1.0, 1.0, 1.0)
    assert all(r[2] == 0.0 for r in rows[:-1])


def test_calibration_fixture_three_bins():
    preds = [P(0, [0], prob=0.05), P(0, [1], prob=0.05),          # bin 0: acc 1/2
             P(0, [0], prob=0.55),                                 # bin 5: acc 1
             P(0, [1], prob=1.0), P(0, [0], prob=0.93)]            # bin 9: acc 1/2
    rows = calibration_bins(preds)
    assert rows[0] == (0.0, 0.1, pytest.approx(2 / 5), pytest.approx(1 / 2))
    assert rows[5] == (0.5, 0.6, pytest.approx(1 / 5), 1.0)
    assert rows[9] == (0.9, 1.0, pytest.approx(2 / 5), pytest.approx(1 / 2))
    assert sum(r[2] for r in rows) == pytest.approx(1.0, abs=1e-9)
    assert rows[9][2] > 0   # prob 1.0 lands in the closed last bin


def test_report_writers(tmp_path):
    preds = [P(0, [0], prob=0.8), P(1, [0], prob=0.3)]
    write_metrics_summary(tmp_path / "m.csv", [("accuracy", accuracy(preds))])
    write_per_class_pr(tmp_path / "p.csv", per_class_pr(preds, 2), label_names=["US", "JP"])
    write_calibration(tmp_path / "c.csv", calibration_bins(preds))
    assert (tmp_path / "m.csv").read_text().splitlines()[0] == "metric,value"
    assert "US" in (tmp_path / "p.csv").read_text()
    assert len((tmp_path / "c.csv").read_text().splitlines()) == 11
