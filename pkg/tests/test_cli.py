import re

import pytest

from risingsun import cli
from risingsun.formats import read_decomposition

CE = "RSD 1\ndim 2\nrect 0 1 0 1\ncells 2 2\nf 1 1 1 0\n"


@pytest.fixture
def ce_file(tmp_path):
    p = tmp_path / "ce.rsd"
    p.write_text(CE)
    return p


def run(argv, capsys):
    code = cli.main([str(a) for a in argv])
    out, err = capsys.readouterr()
    return code, out, err


def test_decompose_counterexample(ce_file, tmp_path, capsys):
    out_path = tmp_path / "ce.rsdec"
    code, _, _ = run(["decompose", "--input", ce_file, "--level", "7/8", "--output", out_path], capsys)
    assert code == cli.EXIT_OK
    text = out_path.read_text()
    assert "select [0,2/3)x[0,1) mean=7/8" in text
    assert "select [2/3,1)x[0,4/7) mean=7/8" in text


def test_decompose_level_below_mean(ce_file, capsys):
    code, _, err = run(["decompose", "--input", ce_file, "--level", "1/2"], capsys)
    assert code == cli.EXIT_LEVEL_BELOW_MEAN
    assert len(err.strip().splitlines()) == 1


def test_decompose_float_mode(ce_file, capsys):
    code, out, _ = run(["decompose", "--input", ce_file, "--level", "7/8", "--mode", "float"], capsys)
    assert code == 0
    cuts = [float(x) for x in re.findall(r"select \[0\.0,([0-9.e-]+)\)", out)]
    assert cuts[0] == pytest.approx(2 / 3, rel=1e-9)
    assert "x[0.0,0.5714285714285" in out


def test_decompose_truncation_still_succeeds(tmp_path, capsys):
    p = tmp_path / "spiky.rsd"
    p.write_text("RSD 1\ndim 1\nrect 0 1\ncells 8\nf 9 0 9 0 9 0 9 0\n")
    code, out, err = run(["decompose", "--input", p, "--level", "5", "--max-select", "1"], capsys)
    assert code == 0
    assert "complete false" in out and "truncated" in err


def test_error_exit_codes_are_distinct(tmp_path, ce_file, capsys):
    zero = tmp_path / "zero.rsd"
    zero.write_text("RSD 1\ndim 1\nrect 0 1\ncells 1\nf 1\nw 0\n")
    garbage = tmp_path / "bad.rsd"
    garbage.write_text("RSD 1\ndim 1\n")
    cube3 = tmp_path / "c3.rsdec"
    cube3.write_text("RSDEC 1\nlevel 1\ncomplete true\ndomain [0,1)x[0,1)x[0,1)\n")
    nonsq = tmp_path / "nonsq.rsd"
    nonsq.write_text("RSD 1\ndim 2\nrect 0 2 0 1\ncells 1 1\nf 1\n")
    cases = {
        cli.EXIT_USAGE: ["decompose", "--input", ce_file, "--level", "abc"],
        cli.EXIT_PARSE: ["decompose", "--input", garbage, "--level", "1"],
        cli.EXIT_LEVEL_BELOW_MEAN: ["decompose", "--input", ce_file, "--level", "0"],
        cli.EXIT_ZERO_MEASURE: ["decompose", "--input", zero, "--level", "1"],
        cli.EXIT_UNSUPPORTED_DIM: ["render", "--input", cube3],
        cli.EXIT_UNKNOWN_PRESET: ["gen", "--preset", "nope"],
        cli.EXIT_CZ_INPUT: ["cz", "--input", nonsq, "--level", "2"],
        cli.EXIT_POLICY: ["decompose", "--input", ce_file, "--level", "1", "--max-depth", "0"],
        cli.EXIT_IO: ["decompose", "--input", tmp_path / "missing.rsd", "--level", "1"],
    }
    for expected, argv in cases.items():
        code, _, err = run(argv, capsys)
        assert code == expected, argv
        assert err.strip(), argv
    codes = [v for k, v in vars(cli).items() if k.startswith("EXIT_")]
    assert len(codes) == len(set(codes))


def test_verify_round(ce_file, tmp_path, capsys):
    dec_path = tmp_path / "ce.rsdec"
    run(["decompose", "--input", ce_file, "--level", "7/8", "--dump-tree", "--output", dec_path], capsys)
    code, out, _ = run(["verify", "--input", ce_file, "--decomposition", dec_path], capsys)
    assert code == 0
    assert "residual_violation: 0" in out and out.rstrip().endswith("passed: true")


def test_verify_detects_edit(ce_file, tmp_path, capsys):
    dec_path = tmp_path / "ce.rsdec"
    run(["decompose", "--input", ce_file, "--level", "7/8", "--output", dec_path], capsys)
    dec_path.write_text(dec_path.read_text().replace("select [0,2/3)x[0,1)", "select [0,1/2)x[0,1)"))
    code, out, _ = run(["verify", "--input", ce_file, "--decomposition", dec_path], capsys)
    assert code == cli.EXIT_VERIFY_FAILED
    assert "means_ok: false" in out


def test_verify_empty_selection(tmp_path, capsys):
    d = tmp_path / "zero.rsd"
    d.write_text("RSD 1\ndim 2\nrect 0 1 0 1\ncells 2 2\nf 0 0 0 0\n")
    dec = tmp_path / "zero.rsdec"
    run(["decompose", "--input", d, "--level", "1", "--output", dec], capsys)
    assert "select" not in dec.read_text()
    code, out, _ = run(["verify", "--input", d, "--decomposition", dec], capsys)
    assert code == 0


def test_verify_domain_mismatch(ce_file, tmp_path, capsys):
    dec = tmp_path / "other.rsdec"
    dec.write_text("RSDEC 1\nlevel 1\ncomplete true\ndomain [0,2)x[0,1)\n")
    code, _, _ = run(["verify", "--input", ce_file, "--decomposition", dec], capsys)
    assert code == cli.EXIT_DOMAIN_MISMATCH


def test_verify_float_decomposition(ce_file, tmp_path, capsys):
    dec = tmp_path / "f.rsdec"
    run(["decompose", "--input", ce_file, "--level", "7/8", "--mode", "float", "--dump-tree",
         "--output", dec], capsys)
    assert not read_decomposition(dec).exact
    code, out, _ = run(["verify", "--input", ce_file, "--decomposition", dec], capsys)
    assert code == 0, out
    code, _, _ = run(["verify", "--input", ce_file, "--decomposition", dec, "--tolerance", "0"], capsys)
    assert code == cli.EXIT_VERIFY_FAILED


def test_cz_single_cube(tmp_path, capsys):
    p = tmp_path / "spike.rsd"
    p.write_text("RSD 1\ndim 2\nrect 0 1 0 1\ncells 2 2\nf 4 0 0 0\n")
    code, out, _ = run(["cz", "--input", p, "--level", "3/2"], capsys)
    assert code == 0
    assert "cube [0,1/2)x[0,1/2) mean=4 bound=6" in out


def test_cz_zero_density(tmp_path, capsys):
    p = tmp_path / "zero.rsd"
    p.write_text("RSD 1\ndim 2\nrect 0 1 0 1\ncells 2 2\nf 0 0 0 0\n")
    code, out, _ = run(["cz", "--input", p, "--level", "1"], capsys)
    assert code == 0 and "cube" not in out


def test_cz_side_by_side(ce_file, capsys):
    code, out, _ = run(["cz", "--input", ce_file, "--level", "7/8"], capsys)
    assert code == 0
    table = out.split("calderon-zygmund", 1)[1].splitlines()[1:]
    cz_means = [re.search(r"mean=(\S+)", row[:48]).group(1) for row in table if row[:48].strip()]
    rs_means = [re.search(r"mean=(\S+)", row[48:]).group(1) for row in table if row[48:].strip()]
    assert cz_means and all(m != "7/8" for m in cz_means)
    assert rs_means == ["7/8", "7/8"]


def test_gen_presets(tmp_path, capsys):
    code, out, _ = run(["gen", "--preset", "paper-counterexample"], capsys)
    assert code == 0 and out == CE
    first = run(["gen", "--preset", "random", "--seed", "7"], capsys)[1]
    assert first == run(["gen", "--preset", "random", "--seed", "7"], capsys)[1]
    assert first != run(["gen", "--preset", "random", "--seed", "8"], capsys)[1]
    out = run(["gen", "--preset", "riesz-1d-step"], capsys)[1]
    assert "dim 1\n" in out and "cells 2\n" in out and "f 2 0\n" in out


def test_render_command(ce_file, tmp_path, capsys):
    dec = tmp_path / "ce.rsdec"
    run(["decompose", "--input", ce_file, "--level", "7/8", "--output", dec], capsys)
    svg = tmp_path / "ce.svg"
    code, _, _ = run(["render", "--input", dec, "--output", svg, "--svg-width", "300",
                      "--svg-height", "200", "--color-by", "depth"], capsys)
    assert code == 0
    text = svg.read_text()
    assert text.count('class="selected"') == 2 and text.count('class="residual"') == 1


def test_pipeline_is_byte_identical(tmp_path, capsys):
    outputs = []
    for run_no in range(2):
        base = tmp_path / str(run_no)
        base.mkdir()
        run(["gen", "--preset", "random", "--seed", "3", "--output", base / "d.rsd"], capsys)
        run(["decompose", "--input", base / "d.rsd", "--level", "16", "--dump-tree",
             "--output", base / "d.rsdec"], capsys)
        rep = run(["verify", "--input", base / "d.rsd", "--decomposition", base / "d.rsdec"], capsys)[1]
        outputs.append([(base / n).read_bytes() for n in ("d.rsd", "d.rsdec")] + [rep])
    assert outputs[0] == outputs[1]


def test_usage_errors(capsys):
    assert cli.main([]) == cli.EXIT_USAGE
    assert cli.main(["decompose", "--mode", "fuzzy"]) == cli.EXIT_USAGE
    assert cli.main(["--help"]) == cli.EXIT_OK
