import xml.etree.ElementTree as ET
from fractions import Fraction as F

from paperfold import builtin_example, parse_scheme, truncate
from paperfold.scar import ScarPair
from paperfold.criterion import divergence_report
from paperfold import reports
from paperfold.render import scar_scene, scheme_scene, collar_scene, write_svg
from paperfold.collar import build_collar
from paperfold.cli import main


def test_machine_block_round_trip():
    cert = divergence_report(builtin_example("seq"), K=3, hypothesis="harmonic")
    d = reports.divergence_dict(cert)
    assert reports.parse_block(reports.emit_block(d)) == d


def test_cli_matches_library_output(capsys):
    rc = main(["criterion", "--builtin", "seq", "--K", "3",
               "--hypothesis", "harmonic", "--format", "machine"])
    out = capsys.readouterr().out
    assert rc == 0
    cert = divergence_report(builtin_example("seq"), K=3, hypothesis="harmonic")
    assert out == reports.emit_block(reports.divergence_dict(cert))


def test_cli_exit_codes(tmp_path, capsys):
    bad = tmp_path / "bad.pfs"
    bad.write_text("polygon 0 0 0 1 0 1 1 0 1\npair 0 0 1/4 1/2 5/6\n")
    rc = main(["validate", str(bad)])
    err = capsys.readouterr().err
    assert rc == 1
    assert "line 2" in err
    rc = main(["criterion", "--builtin", "seq", "--K", "2", "--hypothesis", "none"])
    capsys.readouterr()
    assert rc == 2


def test_cli_example_round_trip(capsys):
    rc = main(["example", "cantor"])
    out = capsys.readouterr().out
    assert rc == 0
    assert parse_scheme(out) == builtin_example("cantor")


def test_cli_validate_and_classify(capsys):
    assert main(["validate", "--builtin", "pillow"]) == 0
    out = capsys.readouterr().out
    assert "all checks passed" in out and "PLAIN" in out
    assert main(["classify", "--builtin", "seq", "--param", "13/16"]) == 0
    out = capsys.readouterr().out
    assert "vertex(1)" in out


def test_svg_well_formed_and_deterministic(tmp_path):
    fs = truncate(builtin_example("seq"), F(1, 64))
    s1 = scheme_scene(fs).to_svg()
    s2 = scheme_scene(fs).to_svg()
    assert s1 == s2
    ET.fromstring(s1)
    ET.fromstring(scar_scene(ScarPair(fs).free).to_svg())
    spec = build_collar(builtin_example("seq").multipolygon)
    ET.fromstring(collar_scene(spec).to_svg())
    out = tmp_path / "x.svg"
    write_svg(scheme_scene(fs), str(out))
    assert out.read_text().startswith("<?xml")


def test_cli_render_and_modulus(tmp_path, capsys):
    out = tmp_path / "scar.svg"
    assert main(["render", "--builtin", "seq", "--eps", "1/64",
                 "--layer", "scar", "--out", str(out)]) == 0
    capsys.readouterr()
    assert out.exists()
    rc = main(["modulus", "--builtin", "seq", "--eps", "1/32",
               "--rel-tol", "0.9", "--per-segment", "1"])
    out_text = capsys.readouterr().out
    assert rc == 0
    assert "rho_hat" in out_text and "GRID-APPROXIMATE" in out_text
