import pytest
from sklearn.metrics import f1_score

from legisrgcn.metrics import EmptySplit, F1Report, f1_report


class TestF1Report:
    def test_hand_oracle_all_positive_predictions(self):
        # 6 actives, 4 passives, predict everything active:
        # precision 0.6, recall 1.0, F1 = 2*0.6/1.6 = 0.75.
        y_true = [1] * 6 + [0] * 4
        y_pred = [1] * 10
        report = f1_report(y_true, y_pred)
        assert report.f1 == pytest.approx(0.75)
        assert report.per_class[1].precision == pytest.approx(0.6)
        assert report.per_class[1].recall == pytest.approx(1.0)
        assert report.per_class[0].f1 == 0.0
        assert report.macro_f1 == pytest.approx(0.375)

    def test_perfect_predictions(self):
        report = f1_report([1, 0, 1, 0], [1, 0, 1, 0])
        assert report.f1 == 1.0 and report.macro_f1 == 1.0

    def test_matches_sklearn(self):
        y_true = [1, 0, 1, 1, 0, 0, 1, 0, 1, 1]
        y_pred = [1, 1, 0, 1, 0, 1, 1, 0, 0, 1]
        report = f1_report(y_true, y_pred)
        assert report.f1 == pytest.approx(f1_score(y_true, y_pred))
        assert report.macro_f1 == pytest.approx(
            f1_score(y_true, y_pred, average="macro")
        )

    def test_supports(self):
        report = f1_report([1, 1, 0], [0, 0, 1])
        assert report.per_class[1].support == 2
        assert report.per_class[0].support == 1

    def test_empty_raises(self):
        with pytest.raises(EmptySplit):
            f1_report([], [])

    def test_length_mismatch(self):
        with pytest.raises(ValueError):
            f1_report([1], [1, 0])

    def test_positive_zero_swaps_roles(self):
        y_true = [1] * 6 + [0] * 4
        y_pred = [1] * 10
        report = f1_report(y_true, y_pred, positive=0)
        assert report.f1 == 0.0
        assert report.macro_f1 == pytest.approx(0.375)
