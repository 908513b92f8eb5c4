from curved_two_body.paths import load_data_path, load_output_dir, load_project_dir


def test_data_path_from_environment(tmp_path, monkeypatch):
    monkeypatch.setenv("DATA_PATH", str(tmp_path))
    assert load_data_path() == tmp_path
    out = load_output_dir("sweep")
    assert out == tmp_path / "sweep"
    assert out.is_dir()


def test_data_path_fallback(tmp_path, monkeypatch):
    monkeypatch.setenv("DATA_PATH", str(tmp_path / "absent"))
    assert load_data_path() == load_project_dir() / "data"
