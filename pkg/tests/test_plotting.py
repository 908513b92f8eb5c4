import numpy as np

from curved_two_body.plotting import line_figure, save_svg, scatter_figure, zero_level_polylines


def _figure():
    curve = np.column_stack([np.linspace(0.0, 1.0, 20), np.linspace(0.0, 1.0, 20) ** 2])
    fig = line_figure({"curve": [curve]}, xlabel="C", ylabel="H", markers={"singular": np.array([[0.5, 0.25]])})
    return scatter_figure(np.array([[0.1, 0.2], [0.3, 0.4]]), xlabel="C", ylabel="H", fig_ax=(fig, fig.axes[0]))


def test_svg_is_reproducible(tmp_path):
    first = save_svg(_figure(), tmp_path / "a.svg").read_bytes()
    second = save_svg(_figure(), tmp_path / "b.svg").read_bytes()
    assert first.startswith(b"<?xml")
    assert first == second


def test_zero_level_of_circle():
    x = np.linspace(-2.0, 2.0, 81)
    y = np.linspace(-2.0, 2.0, 81)
    values = x[:, None] ** 2 + y[None, :] ** 2 - 1.0
    (segment,) = zero_level_polylines(x, y, values)
    assert np.allclose(np.hypot(segment[:, 0], segment[:, 1]), 1.0, atol=1e-2)


def test_zero_level_without_sign_change():
    x = np.linspace(0.0, 1.0, 5)
    assert zero_level_polylines(x, x, np.ones((5, 5))) == []
    assert zero_level_polylines(x, x, np.full((5, 5), np.nan)) == []
