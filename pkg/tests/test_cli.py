import numpy as np
import pytest

from hierseg import (
    load_image,
    read_curve,
    read_hierarchy_dump,
    save_image,
    segment_restructured,
)
from hierseg.cli import main
from conftest import gray_image, smooth_random_image


@pytest.fixture()
def image_file(tmp_path):
    rng = np.random.default_rng(80)
    img = smooth_random_image(rng, 8, 6)
    path = tmp_path / "img.pgm"
    save_image(img, path)
    return path


def test_pipeline_convert_curve_render(tmp_path, image_file):
    dump = tmp_path / "h.dump"
    assert main(["convert", "--input", str(image_file), "--output", str(dump)]) == 0
    d = read_hierarchy_dump(dump)
    assert d.n_leaves == 48

    csv = tmp_path / "c.csv"
    assert main(["curve", "--input", str(dump), "--gmax", "1000",
                 "--output", str(csv)]) == 0
    curve = read_curve(csv)
    assert len(curve) == 48  # clipped to N
    assert np.all(np.diff(curve.error) <= 1e-9)
    # matches the library curve to the CSV's precision
    img = load_image(image_file)
    lib = segment_restructured(img).error_curve(48)
    assert curve.error == pytest.approx(lib.error, rel=1e-8, abs=1e-6)

    out = tmp_path / "g1.pgm"
    assert main(["render", "--input", str(image_file), "--hierarchy", str(dump),
                 "--g", "1", "--output", str(out)]) == 0
    rendered = load_image(out)
    assert len(np.unique(rendered.pixels)) == 1  # the trivial approximation

    full = tmp_path / "gN.pgm"
    assert main(["render", "--input", str(image_file), "--hierarchy", str(dump),
                 "--g", "48", "--output", str(full)]) == 0
    assert full.read_bytes() == image_file.read_bytes()


def test_cluster_and_segment_commands(tmp_path, image_file):
    for cmd in ("cluster", "segment"):
        dump = tmp_path / f"{cmd}.dump"
        assert main([cmd, "--input", str(image_file), "--output", str(dump)]) == 0
        assert read_hierarchy_dump(dump).n_leaves == 48


def test_asi_command(tmp_path, image_file):
    dump = tmp_path / "h.dump"
    main(["convert", "--input", str(image_file), "--output", str(dump)])
    out = tmp_path / "asi.dump"
    assert main(["asi", "--input", str(image_file), "--hierarchy", str(dump),
                 "--g", "5", "--mode", "clustering", "--output", str(out)]) == 0
    d = read_hierarchy_dump(out)
    assert d.n_leaves == 48
    # asi without --hierarchy runs the conversion itself
    out2 = tmp_path / "asi2.dump"
    assert main(["asi", "--input", str(image_file), "--g", "3",
                 "--output", str(out2)]) == 0


def test_dump_command_round_trips(tmp_path, image_file):
    dump = tmp_path / "h.dump"
    main(["segment", "--input", str(image_file), "--output", str(dump)])
    out = tmp_path / "h2.dump"
    assert main(["dump", "--input", str(dump), "--output", str(out)]) == 0
    assert out.read_text() == dump.read_text()


def test_oracle_command(tmp_path, capsys):
    img = gray_image([0, 1, 5])
    path = tmp_path / "tiny.pgm"
    save_image(img, path)
    assert main(["oracle", "--input", str(path), "--g", "2"]) == 0
    out = capsys.readouterr().out
    assert out.startswith("E 0.5")
    assert main(["oracle", "--input", str(path), "--g", "2",
                 "--mode", "segmentation"]) == 0
    out = capsys.readouterr().out.splitlines()
    assert out[1] == "labels 0 0 1"


def test_usage_errors_exit_1(tmp_path, capsys):
    assert main(["bogus"]) == 1
    assert main([]) == 1
    assert main(["curve", "--input", "x", "--gmax", "notanint"]) == 1
    assert main(["asi", "--input", "x"]) == 1  # missing required --g
    capsys.readouterr()


def test_data_errors_exit_2(tmp_path, capsys):
    missing = tmp_path / "missing.pgm"
    assert main(["segment", "--input", str(missing), "--output", "x"]) == 2
    bad = tmp_path / "bad.pgm"
    bad.write_bytes(b"P9 1 1 255 0")
    assert main(["segment", "--input", str(bad), "--output", "x"]) == 2
    big = tmp_path / "big.pgm"
    save_image(gray_image(np.zeros((4, 4))), big)
    assert main(["oracle", "--input", str(big), "--g", "2"]) == 2  # capacity
    tiny = tmp_path / "tiny.pgm"
    save_image(gray_image([1, 2]), tiny)
    dump = tmp_path / "h.dump"
    main(["segment", "--input", str(tiny), "--output", str(dump)])
    assert main(["render", "--input", str(tiny), "--hierarchy", str(dump),
                 "--g", "5", "--output", "x"]) == 2  # g out of range
    capsys.readouterr()


def test_missing_output_is_data_error(image_file, capsys):
    assert main(["segment", "--input", str(image_file)]) == 2
    capsys.readouterr()
