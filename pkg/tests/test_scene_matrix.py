import io

import numpy as np
import pytest
from hypothesis import given, strategies as st

from heritage_flow.geofence import Site, SiteCatalog
from heritage_flow.scene_matrix import (
    SceneLabel,
    aggregate_scene_counts,
    build_matrix,
    read_ordering,
    read_scene_csv,
    representative_scenes,
    top1_labels,
    write_scene_csv,
)


def catalog_of(*site_ids):
    return SiteCatalog([Site(s, s, float(i), 0.0, 1.0) for i, s in enumerate(site_ids)])


class TestSceneLabel:
    def test_confidence_bounds(self):
        with pytest.raises(ValueError):
            SceneLabel("p1", "ruins", 1.5)
        with pytest.raises(ValueError):
            SceneLabel("p1", "ruins", -0.1)

    def test_empty_label_rejected(self):
        with pytest.raises(ValueError):
            SceneLabel("p1", "", 0.5)


class TestTop1:
    def test_argmax_confidence(self):
        labels = [SceneLabel("p1", "ruins", 0.4), SceneLabel("p1", "valley", 0.6)]
        assert top1_labels(labels)["p1"].label == "valley"

    def test_tie_takes_smaller_label(self):
        labels = [SceneLabel("p1", "valley", 0.5), SceneLabel("p1", "bazaar", 0.5)]
        assert top1_labels(labels)["p1"].label == "bazaar"


class TestAggregate:
    def test_counts_per_site_label(self):
        labels = [SceneLabel(f"p{i}", "ruins", 0.9) for i in range(3)]
        labels.append(SceneLabel("p3", "valley", 0.8))
        assigned = {f"p{i}": "a" for i in range(4)}
        counts, skipped = aggregate_scene_counts(labels, assigned)
        assert counts == {("a", "ruins"): 3, ("a", "valley"): 1}
        assert skipped == 0

    def test_empty_labels(self):
        counts, skipped = aggregate_scene_counts([], {"p1": "a"})
        assert counts == {} and skipped == 0

    def test_unassigned_photo_skipped_with_counter(self):
        labels = [SceneLabel("p1", "ruins", 0.9), SceneLabel("p2", "ruins", 0.9)]
        counts, skipped = aggregate_scene_counts(labels, {"p1": "a"})
        assert counts == {("a", "ruins"): 1}
        assert skipped == 1


class TestRepresentativeScenes:
    def test_twenty_distinct_keeps_two(self):
        counts = {("a", f"label{i:02d}"): 20 - i for i in range(20)}
        assert representative_scenes(counts, "a", fraction=0.1) == ["label00", "label01"]

    def test_three_distinct_keeps_one(self):
        counts = {("a", "ruins"): 5, ("a", "valley"): 3, ("a", "bazaar"): 1}
        assert representative_scenes(counts, "a", fraction=0.1) == ["ruins"]

    def test_fraction_034_of_three(self):
        # ceil(0.34 * 3) = ceil(1.02) = 2
        counts = {("a", "ruins"): 6, ("a", "valley"): 3, ("a", "bazaar"): 1}
        assert representative_scenes(counts, "a", fraction=0.34) == ["ruins", "valley"]

    def test_count_ties_alphabetical(self):
        counts = {("a", "valley"): 2, ("a", "bazaar"): 2, ("a", "ruins"): 2}
        assert representative_scenes(counts, "a", fraction=0.34) == ["bazaar", "ruins"]

    def test_unknown_site_empty(self):
        assert representative_scenes({("a", "ruins"): 1}, "zzz") == []


class TestBuildMatrix:
    def test_single_site_single_label(self):
        counts = {("a", "ruins"): 4}
        matrix = build_matrix(counts, catalog_of("a"), fraction=1.0)
        assert matrix.sites == ["a"]
        assert matrix.labels == ["ruins"]
        assert matrix.values.tolist() == [[1.0]]

    def test_disjoint_sites_are_sparse(self):
        counts = {("a", "ruins"): 3, ("b", "valley"): 2}
        matrix = build_matrix(counts, catalog_of("a", "b"), fraction=1.0)
        i_r = matrix.labels.index("ruins")
        i_v = matrix.labels.index("valley")
        assert matrix.values[0][i_r] == 1.0 and matrix.values[0][i_v] == 0.0
        assert matrix.values[1][i_v] == 1.0 and matrix.values[1][i_r] == 0.0

    def test_ordering_ranks_columns(self):
        counts = {("a", "ruins"): 1, ("a", "mountain_path"): 1, ("a", "bazaar"): 1}
        ordering = {"mountain_path": 1, "ruins": 11, "bazaar": 19}
        matrix = build_matrix(counts, catalog_of("a"), fraction=1.0, ordering=ordering)
        assert matrix.labels == ["mountain_path", "ruins", "bazaar"]

    def test_missing_labels_order_last_alphabetical(self):
        counts = {("a", "zebra_crossing"): 1, ("a", "alley"): 1, ("a", "valley"): 1}
        ordering = {"valley": 2}
        matrix = build_matrix(counts, catalog_of("a"), fraction=1.0, ordering=ordering)
        assert matrix.labels == ["valley", "alley", "zebra_crossing"]

    def test_filtering_zeroes_never_renormalizes(self):
        counts = {("a", "ruins"): 6, ("a", "valley"): 3, ("a", "bazaar"): 1}
        full = build_matrix(counts, catalog_of("a"), fraction=1.0)
        assert full.values.sum() == pytest.approx(1.0, abs=1e-12)
        filtered = build_matrix(counts, catalog_of("a"), fraction=0.34)
        i_r = filtered.labels.index("ruins")
        i_v = filtered.labels.index("valley")
        assert filtered.values[0][i_r] == pytest.approx(0.6, abs=1e-12)
        assert filtered.values[0][i_v] == pytest.approx(0.3, abs=1e-12)
        assert "bazaar" not in filtered.labels

    def test_site_with_no_labels_has_zero_row(self):
        counts = {("a", "ruins"): 1}
        matrix = build_matrix(counts, catalog_of("a", "b"), fraction=1.0)
        assert matrix.values[1].sum() == 0.0

    @given(st.permutations(list(range(6))))
    def test_invariant_under_label_permutation(self, order):
        base = [
            SceneLabel("p0", "ruins", 0.9),
            SceneLabel("p1", "ruins", 0.8),
            SceneLabel("p2", "valley", 0.7),
            SceneLabel("p3", "bazaar", 0.6),
            SceneLabel("p4", "valley", 0.5),
            SceneLabel("p5", "ruins", 0.4),
        ]
        assigned = {f"p{i}": "a" for i in range(6)}
        shuffled = [base[i] for i in order]
        c1, _ = aggregate_scene_counts(base, assigned)
        c2, _ = aggregate_scene_counts(shuffled, assigned)
        m1 = build_matrix(c1, catalog_of("a"), fraction=0.5)
        m2 = build_matrix(c2, catalog_of("a"), fraction=0.5)
        assert m1.labels == m2.labels
        assert np.array_equal(m1.values, m2.values)


class TestSceneCsvIO:
    def test_round_trip(self, tmp_path):
        labels = [SceneLabel("p1", "ruins", 0.9), SceneLabel("p2", "valley", 0.5)]
        path = tmp_path / "scenes.csv"
        write_scene_csv(labels, path)
        assert read_scene_csv(path) == labels

    def test_missing_column(self, tmp_path):
        path = tmp_path / "scenes.csv"
        path.write_text("photo_id,label\np1,ruins\n", encoding="utf-8")
        with pytest.raises(ValueError, match="confidence"):
            read_scene_csv(path)

    def test_matrix_csv_shape(self):
        counts = {("a", "ruins"): 1}
        matrix = build_matrix(counts, catalog_of("a"), fraction=1.0)
        buf = io.StringIO()
        matrix.to_csv(buf)
        lines = buf.getvalue().strip().splitlines()
        assert lines[0] == "site,ruins"
        assert lines[1] == "a,1.000000"

    def test_read_ordering(self, tmp_path):
        path = tmp_path / "ordering.json"
        path.write_text('{"valley": 2, "ruins": 11}', encoding="utf-8")
        assert read_ordering(path) == {"valley": 2, "ruins": 11}
