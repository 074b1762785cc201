"""Runs every subcommand once and validates the JSON outputs, the manifests
and the shipped definition files against the schemas; checks CSV headers."""

import json
import subprocess
import sys
import tempfile
from pathlib import Path

from jsonschema import Draft202012Validator


def load(path):
    with open(path, encoding="utf-8") as fh:
        return json.load(fh)


def validator(root, name):
    schema = load(root / "schemas" / f"{name}.schema.json")
    Draft202012Validator.check_schema(schema)
    return Draft202012Validator(schema)


def check(v, path, failures):
    errors = sorted(v.iter_errors(load(path)), key=lambda e: list(e.path))
    for e in errors:
        failures.append(f"{path}: {e.message}")


def main():
    wtd, root = sys.argv[1], Path(sys.argv[2])
    data = root / "data"
    failures = []
    manifest = validator(root, "manifest")

    for path in sorted(data.glob("*.json")):
        check(validator(root, "iet_definition"), path, failures)

    with tempfile.TemporaryDirectory() as tmp:
        out = Path(tmp)
        runs = [
            (["simulate", "--t-max", "1e3", "--out", out / "sim.csv"], None,
             "t,d_now,d_max,avg_d"),
            (["simulate", "--t-max", "1e3", "--n-directions", "3", "--out", out / "sim3.csv"], None,
             "t,d_now,d_max,avg_d"),
            (["iet-run", "--def", data / "genus2.json", "--n", "1000", "--out", out / "cyc.csv"], None,
             "n,count_A,count_B,count_C,count_D,pairing_0,cycle_sum"),
            (["lyapunov", "--def", data / "genus2.json", "--steps", "500", "--out", out / "l.json"],
             "lyapunov", None),
            (["lyapunov", "--def", data / "golden.json", "--steps", "500", "--out", out / "g.json"],
             "lyapunov", None),
            (["fit", "--in", data / "fixtures" / "n_squared.csv", "--out", out / "fit.json"], "fit", None),
            (["reproduce", "--t-max", "1e3", "--n-directions", "3", "--out", out / "exp.json"],
             "exponents", None),
        ]
        for args, schema, header in runs:
            artifact = Path(args[args.index("--out") + 1])
            proc = subprocess.run([wtd] + [str(a) for a in args], capture_output=True, text=True)
            if proc.returncode != 0:
                failures.append(f"{args[0]} exited {proc.returncode}: {proc.stderr.strip()}")
                continue
            if schema:
                check(validator(root, schema), artifact, failures)
            if header:
                with open(artifact, encoding="utf-8") as fh:
                    first = fh.readline().strip()
                if first != header:
                    failures.append(f"{artifact}: header {first!r}, expected {header!r}")
            check(manifest, Path(str(artifact) + ".manifest.json"), failures)

    for f in failures:
        print("FAIL", f)
    print(f"schema validation: {len(failures)} failure(s)")
    return 1 if failures else 0


if __name__ == "__main__":
    sys.exit(main())
