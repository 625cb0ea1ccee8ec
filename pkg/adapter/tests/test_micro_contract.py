import pytest

from vibspect_adapter.cli import main
from vibspect_adapter.config import AdapterConfig, AdapterError
from vibspect_adapter.runtime import train


def test_train_one_epoch_smoke(tiny_dataset, tmp_path, capsys):
    work = tmp_path / "work"
    config = AdapterConfig(
        dataset_dir=str(tiny_dataset),
        epochs=1,
        image_size=64,
        work_dir=str(work),
        seed=1,
    )
    artifact = train(config)
    assert artifact.exists()
    assert (work / "data.yaml").exists()
    # Read-only consumer: nothing new inside the dataset directory.
    created = {p.name for p in tiny_dataset.iterdir()}
    assert created == {"images", "labels", "manifest.json"}


def test_train_epochs_zero_is_config_error(tiny_dataset):
    config = AdapterConfig(dataset_dir=str(tiny_dataset), epochs=0)
    with pytest.raises(AdapterError, match="epochs"):
        train(config)


def test_train_missing_labels_is_layout_error(tiny_dataset, tmp_path):
    import shutil

    shutil.rmtree(tiny_dataset / "labels")
    config = AdapterConfig(
        dataset_dir=str(tiny_dataset), epochs=1, image_size=64,
        work_dir=str(tmp_path / "w"),
    )
    with pytest.raises(AdapterError, match="layout"):
        train(config)


def test_unknown_model_id(tiny_dataset, tmp_path):
    config = AdapterConfig(
        dataset_dir=str(tiny_dataset), model="sorcery", epochs=1,
        image_size=64, work_dir=str(tmp_path / "w"),
    )
    with pytest.raises(AdapterError, match="unknown model id"):
        train(config)


def test_cli_train_and_infer(tiny_dataset, tmp_path, capsys):
    work = tmp_path / "work"
    code = main(
        [
            "train",
            "--dataset",
            str(tiny_dataset),
            "--epochs",
            "1",
            "--image-size",
            "64",
            "--work-dir",
            str(work),
        ]
    )
    assert code == 0
    out = capsys.readouterr().out
    assert "model artifact:" in out
    artifact = out.rsplit("model artifact:", 1)[1].strip()

    preds = tmp_path / "preds"
    code = main(
        [
            "infer",
            "--model",
            artifact,
            "--images",
            str(tiny_dataset / "images" / "test"),
            "--out",
            str(preds),
            "--conf-floor",
            "0.0",
        ]
    )
    assert code == 0
    files = sorted(preds.glob("*.txt"))
    assert len(files) == 2  # one per test image, even if empty
    for pred_file in files:
        for line in pred_file.read_text().splitlines():
            fields = line.split()
            assert len(fields) == 6
            assert int(fields[0]) in (0, 1, 2, 3)
            values = [float(f) for f in fields[1:]]
            assert all(0.0 <= v <= 1.0 for v in values)


def test_cli_infer_empty_images_dir(tiny_dataset, tmp_path, capsys):
    work = tmp_path / "work"
    main(
        [
            "train",
            "--dataset",
            str(tiny_dataset),
            "--epochs",
            "1",
            "--image-size",
            "64",
            "--work-dir",
            str(work),
        ]
    )
    artifact = str(work / "micro_model.pt")
    empty = tmp_path / "no_images"
    empty.mkdir()
    out_dir = tmp_path / "preds"
    assert main(["infer", "--model", artifact, "--images", str(empty), "--out", str(out_dir)]) == 0
    assert list(out_dir.glob("*.txt")) == []


def test_cli_infer_bad_model(tmp_path, capsys):
    bad = tmp_path / "model.pt"
    bad.write_bytes(b"junk")
    code = main(
        ["infer", "--model", str(bad), "--images", str(tmp_path), "--out", str(tmp_path / "o")]
    )
    assert code == 2
