"""Run `stark verify` twice and validate the outputs against the published schema."""
import csv
import json
import pathlib
import subprocess
import sys
import tempfile

import jsonschema

EXPECTED_HEADER = [
    "n", "lambda_shoot", "lambda_oracle", "lambda_pred", "lambda_resid",
    "kappa_shoot", "kappa_oracle", "kappa_pred", "kappa_resid", "omega_r",
]


def main() -> int:
    exe, schema_path = sys.argv[1], sys.argv[2]
    schema = json.loads(pathlib.Path(schema_path).read_text())
    with tempfile.TemporaryDirectory() as tmp:
        config = pathlib.Path(tmp) / "config.json"
        config.write_text(json.dumps({
            "potential": {"family": "exp", "params": {"c": 0.3, "a": 1.0}, "r": 2},
            "n_max": 12,
        }))
        outputs = []
        for run in ("a", "b"):
            out = pathlib.Path(tmp) / run
            proc = subprocess.run([exe, "verify", "--config", str(config), "--out", str(out)],
                                  capture_output=True, text=True)
            if proc.returncode not in (0, 4):
                print(proc.stdout, proc.stderr)
                return 1
            summary = json.loads((out / "summary.json").read_text())
            jsonschema.validate(summary, schema)
            with open(out / "results.csv", newline="") as fh:
                rows = list(csv.reader(fh))
            assert rows[0] == EXPECTED_HEADER, rows[0]
            assert all(len(r) == len(EXPECTED_HEADER) for r in rows), "ragged CSV"
            assert len(rows) == 13, len(rows)
            outputs.append(((out / "results.csv").read_bytes(), (out / "summary.json").read_bytes()))
        assert outputs[0] == outputs[1], "repeated runs differ"
    print("summary.json valid; results.csv header fixed; runs byte-identical")
    return 0


if __name__ == "__main__":
    sys.exit(main())
