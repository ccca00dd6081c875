import numpy as np
import pytest
from PIL import Image

from seg_adapter.errors import ImageDecodeError, ModelLoadError
from seg_adapter.extractors import DinoV2Extractor, ExportJob, export_features
from seg_adapter.formats import read_mtft


def _write_image(path, size=(64, 64), color=(200, 30, 30)):
    img = Image.new("RGB", size, color)
    img.save(path)
    return path


class TestExportJob:
    def test_grid_dims_518(self, tmp_path):
        job = ExportJob(image_path=_write_image(tmp_path / "a.png"),
                        model_id="stub", input_size=(518, 518),
                        output_path=tmp_path / "a.mtft", stride_px=14)
        assert job.grid_hw == (37, 37)

    def test_grid_dims_tiny(self, tmp_path):
        job = ExportJob(image_path=_write_image(tmp_path / "a.png"),
                        model_id="stub", input_size=(28, 28),
                        output_path=tmp_path / "a.mtft", stride_px=14)
        assert job.grid_hw == (2, 2)

    def test_video_size(self, tmp_path):
        job = ExportJob(image_path=_write_image(tmp_path / "a.png"),
                        model_id="stub", input_size=(504, 896),
                        output_path=tmp_path / "a.mtft", stride_px=14)
        assert job.grid_hw == (36, 64)

    def test_rejects_unaligned_size(self, tmp_path):
        with pytest.raises(ValueError):
            ExportJob(image_path=tmp_path / "a.png", model_id="stub",
                      input_size=(100, 100), output_path=tmp_path / "a.mtft",
                      stride_px=14)


class TestExportFeatures:
    def test_stub_export_writes_expected_grid(self, tmp_path):
        job = ExportJob(image_path=_write_image(tmp_path / "a.png"),
                        model_id="stub", input_size=(56, 84),
                        output_path=tmp_path / "a.mtft", stride_px=14)
        out = export_features(job)
        feats = read_mtft(out)
        assert feats.shape[:2] == (4, 6)
        assert np.isfinite(feats).all()

    def test_export_is_deterministic(self, tmp_path):
        img = _write_image(tmp_path / "a.png")
        outs = []
        for name in ("x.mtft", "y.mtft"):
            job = ExportJob(image_path=img, model_id="stub", input_size=(56, 56),
                            output_path=tmp_path / name, stride_px=14)
            outs.append(export_features(job).read_bytes())
        assert outs[0] == outs[1]

    def test_corrupt_image(self, tmp_path):
        bad = tmp_path / "bad.png"
        bad.write_bytes(b"this is not an image")
        job = ExportJob(image_path=bad, model_id="stub", input_size=(28, 28),
                        output_path=tmp_path / "bad.mtft", stride_px=14)
        with pytest.raises(ImageDecodeError):
            export_features(job)

    def test_loads_in_the_engine(self, tmp_path):
        matchseg = pytest.importorskip("matchseg")
        job = ExportJob(image_path=_write_image(tmp_path / "a.png"),
                        model_id="stub", input_size=(70, 70),
                        output_path=tmp_path / "a.mtft", stride_px=14)
        out = export_features(job)
        fm = matchseg.load_feature_map(out, stride_px=14)
        assert (fm.height, fm.width) == (5, 5)


class TestModelLoadFailure:
    def test_hub_failure_becomes_model_load_error(self, monkeypatch):
        torch = pytest.importorskip("torch")

        def boom(*args, **kwargs):
            raise RuntimeError("no network")

        monkeypatch.setattr(torch.hub, "load", boom)
        with pytest.raises(ModelLoadError):
            DinoV2Extractor("dinov2_vitl14")
