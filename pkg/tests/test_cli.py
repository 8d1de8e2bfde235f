import csv
import json
import shutil

import pytest

from p2pmarket.cli import main

from helpers import SAMPLE_CSV


@pytest.fixture
def sample(tmp_path):
    path = tmp_path / "sample_market.csv"
    shutil.copy(SAMPLE_CSV, path)
    return path


def test_clear_writes_trades_and_report(sample, tmp_path):
    out = tmp_path / "out"
    assert main(["clear", "--input", str(sample), "--mechanism", "proposed", "--output", str(out)]) == 0
    rows = list(csv.DictReader((out / "trades.csv").open()))
    assert len(rows) == 8
    assert rows[0] == {"seller_id": "S1", "buyer_id": "B1", "energy_wh": "150",
                       "seller_price": "12.00", "buyer_price": "12.00"}
    report = json.loads((out / "report.json").read_text())
    assert report["totals"]["trc"] == "1.5100"
    assert report["determination"] == {"L": 5, "K": 5, "r_L": "12.10", "b_K": "12.20"}
    assert report["indices"]["bsi"]["B1"] == "1.1667"
    assert report["unsold"] == report["unserved"] == 0
    assert report["revenue"]["S1"] == "0.3875"


def test_clear_multi_block_report(sample, tmp_path):
    config = tmp_path / "config.json"
    ids = [f"S{n}" for n in range(1, 9)] + [f"B{n}" for n in range(1, 9)]
    config.write_text(json.dumps({"block_map": {i: ("north" if i[1] in "135" else "south") for i in ids}}))
    out = tmp_path / "out"
    assert main(["clear", "--input", str(sample), "--config", str(config), "--output", str(out)]) == 0
    report = json.loads((out / "report.json").read_text())
    assert [b["block"] for b in report["blocks"]] == ["north", "south"]


def test_clear_perspective_flag(sample, tmp_path):
    out = tmp_path / "out"
    assert main(["clear", "--input", str(sample), "--perspective", "seller", "--output", str(out)]) == 0
    assert json.loads((out / "report.json").read_text())["perspective"] == "seller"


def test_compare_csv_and_json(sample, tmp_path):
    assert main(["compare", "--input", str(sample), "--format", "csv", "--output", str(tmp_path)]) == 0
    rows = list(csv.DictReader((tmp_path / "comparison.csv").open()))
    assert len(rows) == 9
    assert rows[0]["mechanism"] == "proposed" and rows[0]["trc"] == "1.5100"
    assert main(["compare", "--input", str(sample), "--format", "json", "--output", str(tmp_path)]) == 0
    data = json.loads((tmp_path / "comparison.json").read_text())
    assert [r["trc"] for r in data] == [r["trc"] for r in rows]


def test_validate_ok_and_bad(sample, tmp_path, capsys):
    assert main(["validate", "--input", str(sample)]) == 0
    bad = tmp_path / "bad.csv"
    bad.write_text("id,side,energy_wh,price\nS1,sell,100,10.0\nB1,buy,0,12.0\n")
    assert main(["validate", "--input", str(bad)]) == 1
    out = capsys.readouterr().out
    assert out.count("error:") == 1 and "line 3" in out


def test_clear_refuses_invalid_input(tmp_path):
    bad = tmp_path / "bad.csv"
    bad.write_text("id,side,energy_wh,price\nS1,sell,100,-1\n")
    assert main(["clear", "--input", str(bad), "--output", str(tmp_path / "o")]) == 1
    assert not (tmp_path / "o").exists()


def test_usage_errors(sample, tmp_path):
    assert main([]) == 2
    assert main(["clear", "--input", str(sample), "--mechanism", "dutch", "--output", str(tmp_path)]) == 2
    assert main(["frobnicate"]) == 2


def test_unreadable_input(tmp_path):
    assert main(["compare", "--input", str(tmp_path / "missing.csv")]) == 1
    assert main(["validate", "--input", str(tmp_path / "missing.csv")]) == 1


def test_json_orders_input(tmp_path):
    path = tmp_path / "orders.json"
    path.write_text(json.dumps([
        {"id": "S1", "side": "sell", "energy_wh": 100, "price": "10"},
        {"id": "B1", "side": "buy", "energy_wh": 80, "price": "11", "participation": "nonfractional"},
    ]))
    out = tmp_path / "out"
    assert main(["clear", "--input", str(path), "--output", str(out)]) == 0
    assert (out / "trades.csv").read_text() == "seller_id,buyer_id,energy_wh,seller_price,buyer_price\nS1,B1,80,10.50,10.50\n"


def test_outputs_are_byte_identical_across_runs(sample, tmp_path):
    blobs = []
    for n in range(2):
        out = tmp_path / f"run{n}"
        assert main(["clear", "--input", str(sample), "--output", str(out)]) == 0
        assert main(["compare", "--input", str(sample), "--output", str(out)]) == 0
        blobs.append([(out / f).read_bytes() for f in ("trades.csv", "report.json", "comparison.csv")])
    assert blobs[0] == blobs[1]
