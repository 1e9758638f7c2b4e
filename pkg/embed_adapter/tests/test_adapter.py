"""Adapter conformance: outputs load through the heritage-flow readers with
zero rejections, repeated runs are byte-identical, confidences stay in [0, 1].

All tests run with seeded random weights; conformance does not depend on
what the network learned, only on formats, determinism, and schema.
"""

import json

import numpy as np
import pytest

from heritage_flow.embeddings import read_embeddings
from heritage_flow.scene_matrix import read_scene_csv

from embed_adapter.cli import main
from embed_adapter.extract import extract_embeddings
from embed_adapter.manifest import read_manifest
from embed_adapter.models import MissingWeightsError, load_backbone, load_scene_model, read_categories
from embed_adapter.scenes import predict_scenes

from adapter_helpers import VOCAB, write_manifest

WEIGHTS = "random:0"


@pytest.fixture(scope="session")
def extracted(fixture_dir, tmp_path_factory):
    out = tmp_path_factory.mktemp("emb") / "feats.emb"
    written, skipped = extract_embeddings(fixture_dir / "manifest.csv", out, weights=WEIGHTS)
    return out, written, skipped


@pytest.fixture(scope="session")
def predicted(fixture_dir, tmp_path_factory):
    out = tmp_path_factory.mktemp("scn") / "scenes.csv"
    written, skipped = predict_scenes(
        fixture_dir / "manifest.csv", out, fixture_dir / "categories.txt", weights=WEIGHTS
    )
    return out, written, skipped


class TestEmbeddingsConformance:
    def test_loads_through_primary_reader_with_zero_rejections(self, extracted):
        out, written, skipped = extracted
        vectors = read_embeddings(out)  # raises on any malformed record
        assert written == 10 and skipped == 0
        assert len(vectors) == 10
        assert all(v.dim == 2048 for v in vectors)
        assert all(np.all(np.isfinite(v.values)) for v in vectors)
        assert [v.photo_id for v in vectors] == [f"photo_{i:02d}" for i in range(10)]

    def test_repeated_runs_byte_identical(self, fixture_dir, extracted, tmp_path):
        out, _, _ = extracted
        again = tmp_path / "feats2.emb"
        extract_embeddings(fixture_dir / "manifest.csv", again, weights=WEIGHTS)
        assert again.read_bytes() == out.read_bytes()

    def test_same_image_twice_identical_vectors(self, fixture_dir, tmp_path):
        entries = read_manifest(fixture_dir / "manifest.csv")[:1]
        doubled = [("first", entries[0][1]), ("second", entries[0][1])]
        manifest = write_manifest(tmp_path / "manifest.csv", [(p, path) for p, path in doubled])
        out = tmp_path / "feats.emb"
        extract_embeddings(manifest, out, weights=WEIGHTS)
        a, b = read_embeddings(out)
        assert np.array_equal(a.values, b.values)

    def test_empty_manifest_valid_file(self, tmp_path):
        manifest = write_manifest(tmp_path / "manifest.csv", [])
        out = tmp_path / "feats.emb"
        written, skipped = extract_embeddings(manifest, out, weights=WEIGHTS)
        assert (written, skipped) == (0, 0)
        assert read_embeddings(out) == []

    def test_header_reports_count_and_dimension(self, extracted):
        out, _, _ = extracted
        raw = out.read_bytes()
        assert raw[:4] == b"EMB1"
        assert int.from_bytes(raw[4:8], "little") == 10
        assert int.from_bytes(raw[8:12], "little") == 2048

    def test_companion_metadata(self, extracted):
        out, _, _ = extracted
        meta = json.loads((out.parent / (out.name + ".meta.json")).read_text(encoding="utf-8"))
        assert meta["dimension"] == 2048
        assert meta["weights"] == WEIGHTS
        assert meta["preprocessing"]["center_crop"] == 224

    def test_undecodable_image_skipped_with_counter(self, fixture_dir, tmp_path):
        bad = tmp_path / "broken.png"
        bad.write_bytes(b"not an image at all")
        entries = read_manifest(fixture_dir / "manifest.csv")[:2]
        entries.append(("broken", bad))
        entries.append(("missing", tmp_path / "nope.png"))
        manifest = write_manifest(tmp_path / "manifest.csv", entries)
        out = tmp_path / "feats.emb"
        written, skipped = extract_embeddings(manifest, out, weights=WEIGHTS)
        assert written == 2 and skipped == 2
        assert [v.photo_id for v in read_embeddings(out)] == ["photo_00", "photo_01"]


class TestScenesConformance:
    def test_loads_through_primary_reader(self, predicted):
        out, written, skipped = predicted
        labels = read_scene_csv(out)  # validates confidence range row by row
        assert written == 10 and skipped == 0
        assert len(labels) == 10
        assert all(0.0 <= s.confidence <= 1.0 for s in labels)
        assert all(s.label in VOCAB for s in labels)

    def test_repeated_runs_byte_identical(self, fixture_dir, predicted, tmp_path):
        out, _, _ = predicted
        again = tmp_path / "scenes2.csv"
        predict_scenes(fixture_dir / "manifest.csv", again, fixture_dir / "categories.txt", weights=WEIGHTS)
        assert again.read_bytes() == out.read_bytes()

    def test_same_image_twice_identical_rows(self, fixture_dir, tmp_path):
        entries = read_manifest(fixture_dir / "manifest.csv")[:1]
        manifest = write_manifest(
            tmp_path / "manifest.csv", [("first", entries[0][1]), ("second", entries[0][1])]
        )
        out = tmp_path / "scenes.csv"
        predict_scenes(manifest, out, fixture_dir / "categories.txt", weights=WEIGHTS)
        a, b = read_scene_csv(out)
        assert (a.label, a.confidence) == (b.label, b.confidence)

    def test_empty_manifest_header_only(self, fixture_dir, tmp_path):
        manifest = write_manifest(tmp_path / "manifest.csv", [])
        out = tmp_path / "scenes.csv"
        written, _ = predict_scenes(manifest, out, fixture_dir / "categories.txt", weights=WEIGHTS)
        assert written == 0
        assert out.read_text(encoding="utf-8") == "photo_id,label,confidence\n"
        assert read_scene_csv(out) == []


class TestModels:
    def test_backbone_random_seed_deterministic(self):
        import torch

        a = load_backbone("random:7")
        b = load_backbone("random:7")
        x = torch.zeros(1, 3, 224, 224)
        with torch.no_grad():
            assert torch.equal(a(x), b(x))

    def test_missing_weights_path_aborts(self, tmp_path):
        with pytest.raises(MissingWeightsError):
            load_backbone(str(tmp_path / "nope.pth"))

    def test_scene_model_rejects_pretrained(self):
        with pytest.raises(MissingWeightsError):
            load_scene_model(["a", "b"], weights="pretrained")

    def test_read_categories_places_style(self, tmp_path):
        path = tmp_path / "categories.txt"
        path.write_text("/a/amphitheater 9\n/v/valley 360\nplain_label\n", encoding="utf-8")
        assert read_categories(path) == ["amphitheater", "valley", "plain_label"]


class TestManifest:
    def test_duplicate_ids_rejected(self, tmp_path):
        path = tmp_path / "manifest.csv"
        path.write_text("photo_id,path\np1,a.png\np1,b.png\n", encoding="utf-8")
        with pytest.raises(ValueError, match="duplicate"):
            read_manifest(path)

    def test_missing_column_rejected(self, tmp_path):
        path = tmp_path / "manifest.csv"
        path.write_text("photo_id\np1\n", encoding="utf-8")
        with pytest.raises(ValueError, match="path"):
            read_manifest(path)


class TestCli:
    def test_extract_and_scenes_end_to_end(self, fixture_dir, tmp_path, capsys):
        out_emb = tmp_path / "feats.emb"
        code = main(["extract", "--manifest", str(fixture_dir / "manifest.csv"),
                     "--out", str(out_emb), "--weights", WEIGHTS, "--batch-size", "4"])
        assert code == 0
        assert "wrote 10 embeddings" in capsys.readouterr().out

        out_csv = tmp_path / "scenes.csv"
        code = main(["scenes", "--manifest", str(fixture_dir / "manifest.csv"),
                     "--out", str(out_csv), "--categories", str(fixture_dir / "categories.txt"),
                     "--weights", WEIGHTS])
        assert code == 0
        assert len(read_scene_csv(out_csv)) == 10

    def test_bad_weights_path_exits_1(self, fixture_dir, tmp_path, capsys):
        code = main(["extract", "--manifest", str(fixture_dir / "manifest.csv"),
                     "--out", str(tmp_path / "x.emb"), "--weights", str(tmp_path / "nope.pth")])
        assert code == 1
        assert "error:" in capsys.readouterr().err

    def test_unknown_flag_exits_2(self):
        with pytest.raises(SystemExit) as err:
            main(["extract", "--bogus"])
        assert err.value.code == 2
