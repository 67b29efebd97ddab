"""Walkthrough: the full command-line pipeline in a temporary directory.

synth -> train -> eval -> predict -> report, all through the same entry
point the ``locdict`` console script uses.
"""

import tempfile
from pathlib import Path

from locdict.cli import main

with tempfile.TemporaryDirectory() as tmp:
    tmp = Path(tmp)
    train_csv = tmp / "train.csv"
    test_csv = tmp / "test.csv"
    model = tmp / "model.lcd"
    trace = tmp / "trace.csv"

    print("== synth: generate a seeded benchmark ==")
    assert main([
        "synth", "--classes", "3", "--dim", "20", "--per-class", "60",
        "--separation", "5.0", "--seed", "1", "--train-per-class", "30",
        "--out-train", str(train_csv), "--out-test", str(test_csv),
    ]) == 0
    print(f"wrote {train_csv.name} and {test_csv.name}")

    print("\n== train: fit the model, logging a trace ==")
    assert main([
        "train", "--input", str(train_csv), "--out", str(model),
        "--trace", str(trace), "--seed", "7",
    ]) == 0
    print(f"model file: {model.stat().st_size} bytes")

    print("\n== eval: accuracy on the held-out split ==")
    assert main(["eval", "--model", str(model), "--input", str(test_csv)]) == 0

    print("\n== predict: first five per-sample predictions ==")
    import contextlib
    import io

    buf = io.StringIO()
    with contextlib.redirect_stdout(buf):
        assert main(["predict", "--model", str(model), "--input", str(test_csv)]) == 0
    for line in buf.getvalue().splitlines()[:5]:
        print(line)

    print("\n== report: trace summary ==")
    assert main(["report", "--trace", str(trace)]) == 0
