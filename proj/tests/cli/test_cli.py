#!/usr/bin/env python3
"""End-to-end checks for the rrs command-line tool.

Runs each subcommand, checks exit codes, and validates every JSON document
against the schemas shipped in schema/.
"""

import argparse
import csv
import io
import json
import pathlib
import subprocess
import sys
import tempfile

import jsonschema

failures = []


def check(cond, what):
    if not cond:
        failures.append(what)
        print(f"  FAIL {what}")


class Cli:
    def __init__(self, exe, schemas, cwd):
        self.exe = exe
        self.cwd = cwd
        self.schemas = {}
        for p in pathlib.Path(schemas).glob("*.schema.json"):
            self.schemas[p.name.removesuffix(".schema.json")] = json.loads(p.read_text())
        for s in self.schemas.values():
            jsonschema.Draft202012Validator.check_schema(s)

    def run(self, *args, expect=0):
        proc = subprocess.run([self.exe, *args], capture_output=True, text=True, cwd=self.cwd, timeout=60)
        check(proc.returncode == expect,
              f"{' '.join(args)}: exit {proc.returncode}, expected {expect}; stderr={proc.stderr.strip()[:300]}")
        if expect != 0:
            self.validate(self.stderr_error(proc.stderr), "error")
        return proc

    @staticmethod
    def stderr_error(stderr):
        for line in reversed(stderr.strip().splitlines()):
            if line.startswith("{"):
                return json.loads(line)
        raise AssertionError(f"no JSON error on stderr: {stderr!r}")

    def validate(self, doc, schema):
        try:
            jsonschema.validate(doc, self.schemas[schema])
        except jsonschema.ValidationError as e:
            check(False, f"schema {schema}: {e.message}")

    def json(self, *args, schema):
        proc = self.run(*args)
        doc = json.loads(proc.stdout)
        self.validate(doc, schema)
        return doc


def test_build_and_cost(cli, tmp):
    g = cli.json("build", "--depth", "50", "--res", "160", "--se", "0.25", "--resnet-d", schema="graph")
    check(g["stage_shapes"]["c5"] == {"h": 5, "w": 5, "c": 2048}, "RS-50@160 c5 shape")
    check(g["residual_blocks"] == 16, "RS-50 residual blocks")

    spec = cli.json("build", "--depth", "101", "--width", "1.5", "--res", "192", "--emit-spec", schema="model_spec")
    path = tmp / "spec.json"
    path.write_text(json.dumps(spec))
    again = cli.json("build", "--spec", str(path), "--emit-spec", schema="model_spec")
    check(again == spec, "spec round trip through the CLI")

    c = cli.json("cost", "--depth", "50", "--width", "1.0", "--res", "160", "--se", "0.25", "--resnet-d",
                 schema="cost_report")
    check(abs(c["params"] - 36e6) / 36e6 < 0.03, f"RS-50 params {c['params']}")
    check(abs(c["flops"] - 4.6e9) / 4.6e9 < 0.05, f"RS-50 flops {c['flops']}")
    c2 = cli.json("cost", "--spec", str(path), "--batch", "8", "--bytes", "4", schema="cost_report")
    check(c2["batch"] == 8 and c2["bytes_per_element"] == 4, "cost batch/bytes echoed")
    check("params" in cli.run("--pretty", "cost", "--depth", "50").stdout, "pretty cost table")

    bad = tmp / "bad.json"
    bad.write_text('{"schema":"1","depth":50,"width_mult":1.0,"resolution":-3,"resnet_d":true,"se_ratio":0.25}')
    err = cli.stderr_error(cli.run("cost", "--spec", str(bad), expect=1).stderr)
    check(err["error"]["kind"] == "spec" and err["error"].get("field") == "/resolution", f"spec error {err}")
    err = cli.stderr_error(cli.run("build", "--depth", "77", expect=1).stderr)
    check(err["error"]["kind"] == "unknown_layout", f"unknown layout {err}")
    cli.json("build", "--depth", "77", "--layout", "2,2,2,2", schema="graph")
    err = cli.stderr_error(cli.run("cost", "--depth", "50", "--res", "16", expect=1).stderr)
    check(err["error"]["kind"] == "invalid_argument", f"resolution below 32 {err}")


def test_grid(cli):
    out = cli.run("grid", "--widths", "1.0,2.0", "--depths", "50", "--resolutions", "128,224", "--epochs", "350").stdout
    rows = list(csv.DictReader(io.StringIO(out)))
    check(len(rows) == 4, "grid rows")
    check(rows[0]["depth"] == "50" and int(rows[0]["params"]) > 0, "grid cost columns")
    check("ra_magnitude" in rows[0], "grid policy columns")
    bare = cli.run("grid", "--no-cost", "--widths", "1.0", "--depths", "50", "--resolutions", "160").stdout
    check(bare.splitlines()[0].startswith("depth,width_mult,resolution") and "flops" not in bare, "grid --no-cost")
    cli.run("grid", "--widths", "", "--depths", "50", "--resolutions", "160", expect=1)


def test_pareto(cli, tmp):
    doc = cli.json("pareto", "--data", "tables/table7.csv", "--cost", "tpu_ms", schema="pareto")
    ids = [p["model_id"] for p in doc["frontier"]]
    check("ResNet-RS-50@160" in ids and "EfficientNet-B0@224" not in ids, f"frontier {ids}")
    costs = [p["cost"] for p in doc["frontier"]]
    check(costs == sorted(costs), "frontier sorted by cost")
    b6 = [s for s in doc["speedups"] if s["reference"] == "EfficientNet-B6@528"]
    check(len(b6) == 1 and abs(b6[0]["speedup"] - 2.7) <= 0.05, f"B6 speedup {b6}")
    check(doc["powerlaw"] is not None and doc["powerlaw"]["exponent"] < 0, "power-law fit")

    v = cli.json("pareto", "--table", "table4", "--cost", "v100_s", schema="pareto")
    b6 = [s for s in v["speedups"] if s["reference"] == "EfficientNet-B6@528"]
    check(len(b6) == 1 and abs(b6[0]["speedup"] - 3.3) <= 0.05, f"table4 V100 speedup {b6}")
    embedded = cli.json("pareto", "--cost", "tpu_ms", schema="pareto")
    check(embedded["frontier"] == doc["frontier"], "embedded table equals tables/table7.csv")

    out = cli.run("pareto", "--cost", "flops_b", "--format", "csv").stdout
    check(out.splitlines()[0].startswith("model_id"), "pareto csv header")

    bad = tmp / "bad.csv"
    bad.write_text("model_id,resolution,params_m,flops_b,v100_s,tpu_ms,top1\nX,224,abc,1,,,80\n")
    err = cli.stderr_error(cli.run("pareto", "--data", str(bad), expect=1).stderr)
    check(err["error"]["kind"] == "parse" and err["error"].get("row") == 2 and err["error"].get("column") == "params_m",
          f"parse error {err}")
    empty = tmp / "empty.csv"
    empty.write_text("")
    cli.run("pareto", "--data", str(empty), expect=1)
    cli.run("pareto", "--cost", "joules", expect=2)
    cli.run("pareto", "--data", "tables/table7.csv", "--table", "table4", expect=2)


def test_schedule(cli, tmp):
    dump = tmp / "lr.csv"
    doc = cli.json("schedule", "--preset", "resnet-rs", "--batch", "1024", "--epochs", "350", "--steps-per-epoch",
                   "1251", "--dump", str(dump), schema="schedule")
    rows = list(csv.DictReader(dump.open()))
    check(list(rows[0].keys()) == ["step", "lr", "ema_decay", "sd_final_rate"], "schedule header")
    check(float(rows[0]["lr"]) == 0.0 and float(rows[-1]["lr"]) == 0.0, "schedule endpoints")
    check(doc["rows"] == len(rows) == 350 * 1251 + 1, "schedule row count")
    lin = cli.json("schedule", "--lr-mode", "linear-scaling", "--epochs", "10", "--steps-per-epoch", "10",
                   "--dump", str(dump), schema="schedule")
    check(abs(lin["peak_lr"] - 0.4) < 1e-12, "linear-scaling peak LR")
    sd = cli.json("schedule", "--depth", "350", "--res", "320", "--epochs", "10", "--steps-per-epoch", "4",
                  "--dump", str(dump), schema="schedule")
    check(sd["reg"]["dropout_rate"] == 0.4, "schedule reg from policy table")
    out = cli.run("schedule", "--epochs", "2", "--steps-per-epoch", "5", "--warmup-epochs", "1").stdout
    check(len(out.splitlines()) == 12, "stdout CSV rows")
    cli.run("schedule", "--depth", "350", expect=2)
    cli.run("schedule", "--depth", "50", "--res", "224", expect=1)
    cli.run("schedule", "--preset", "efficientnet", expect=1)
    cli.run("schedule", "--preset", "nope", expect=2)


def test_strategy(cli):
    doc = cli.json("strategy", "--epochs", "350", "--steps", "3", schema="strategy")
    check(doc["strategy"]["kind"] == "DepthSlowResolution", "long regime")
    check([(s["depth"], s["resolution"]) for s in doc["sequence"]] == [(50, 160), (101, 192), (152, 224), (200, 256)],
          "depth walk")
    check(cli.json("strategy", "--epochs", "10", schema="strategy")["strategy"]["kind"] == "WidthSlowResolution",
          "short regime")
    mid = cli.json("strategy", "--epochs", "100", schema="strategy")["strategy"]
    check(mid["kind"] == "RegimeDependent" and mid["advisory"], "middle regime")
    cli.run("strategy", "--overfit", "maybe", expect=2)
    cli.run("strategy", "--epochs", "0", expect=2)


def test_augment(cli, tmp):
    out = tmp / "aug.ppm"
    a = cli.json("augment-demo", "--size", "32", "--layers", "3", "--magnitude", "12", "--seed", "9", "--out", str(out),
                 schema="augment")
    b = cli.json("augment-demo", "--size", "32", "--layers", "3", "--magnitude", "12", "--seed", "9", schema="augment")
    check(a["ops"] == b["ops"] and a["output_fnv1a64"] == b["output_fnv1a64"], "augment determinism")
    check(out.read_bytes().startswith(b"P6\n32 32\n255\n"), "PPM written")
    c = cli.json("augment-demo", "--in", str(out), "--ops", "rotate", "--layers", "1", schema="augment")
    check(c["ops"][0]["name"] == "rotate" and c["width"] == 32, "augment from file")
    cli.run("augment-demo", "--magnitude", "31", expect=1)
    cli.run("augment-demo", "--ops", "warp", expect=1)


def test_usage(cli):
    cli.run(expect=2)
    cli.run("frobnicate", expect=2)
    cli.run("cost", "--depth", "50", "--bogus", expect=2)
    cli.run("cost", "--bytes", "3", expect=2)
    check(cli.run("--version").stdout.startswith("rrs "), "version")
    check("build" in cli.run("--help").stdout, "help")


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--rrs", required=True)
    ap.add_argument("--schemas", required=True)
    args = ap.parse_args()
    repo = pathlib.Path(args.schemas).resolve().parent
    cli = Cli(args.rrs, args.schemas, repo)
    tests = [("build/cost", lambda t: test_build_and_cost(cli, t)), ("grid", lambda t: test_grid(cli)),
             ("pareto", lambda t: test_pareto(cli, t)), ("schedule", lambda t: test_schedule(cli, t)),
             ("strategy", lambda t: test_strategy(cli)), ("augment-demo", lambda t: test_augment(cli, t)),
             ("usage", lambda t: test_usage(cli))]
    with tempfile.TemporaryDirectory() as d:
        for name, fn in tests:
            before = len(failures)
            try:
                fn(pathlib.Path(d))
            except Exception as e:  # noqa: BLE001
                failures.append(f"{name}: {e!r}")
            print(f"{'ok  ' if len(failures) == before else 'FAIL'} {name}")
    if failures:
        print(f"{len(failures)} failure(s)")
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
