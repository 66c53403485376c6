"""Checks that the shipped JSON schema and the C++ parser accept and reject the same documents."""
import copy
import json
import pathlib
import subprocess
import sys

import jsonschema

cli, source, scratch = sys.argv[1], pathlib.Path(sys.argv[2]), pathlib.Path(sys.argv[3])
scratch.mkdir(parents=True, exist_ok=True)
schema = json.loads((source / "schema" / "run_config.schema.json").read_text())
validator = jsonschema.Draft202012Validator(schema)
jsonschema.Draft202012Validator.check_schema(schema)

base = json.loads((source / "configs" / "fig2_half_blocked_l1.json").read_text())


def mutate(path, value, delete=False):
    doc = copy.deepcopy(base)
    node = doc
    for key in path[:-1]:
        node = node.setdefault(key, {})
    if delete:
        node.pop(path[-1], None)
    else:
        node[path[-1]] = value
    return doc


cases = {p.stem: json.loads(p.read_text()) for p in sorted((source / "configs").glob("*.json"))}
cases.update({
    "unknown_top": mutate(["colour"], "red"),
    "unknown_beam": mutate(["beam", "spin"], 1),
    "missing_z": mutate(["z"], None, delete=True),
    "missing_field": mutate(["field"], None, delete=True),
    "bad_state": mutate(["beam", "state"], "mixed"),
    "bad_charge": mutate(["beam", "charge_sign"], 0),
    "negative_n": mutate(["beam", "n_a"], -1),
    "float_n": mutate(["beam", "n_a"], 1.5),
    "string_b0": mutate(["beam", "b0"], "1"),
    "zero_b0": mutate(["beam", "b0"], 0.0),
    "bad_glaser_a": mutate(["field", "parameters", "a"], -4.0),
    "bad_n_phi": mutate(["grid", "n_phi"], 2),
    "bad_levels": mutate(["verify", "richardson_levels"], 9),
    "bool_frame": mutate(["verify", "moving_frame"], False),
    "int_frame": mutate(["verify", "moving_frame"], 1),
    "dense_tol": mutate(["envelope", "dense_tol"], 1e-9),
    "bad_dense_tol": mutate(["envelope", "dense_tol"], 0.0),
    "stretch": mutate(["verify", "radial_stretch"], 0.0),
    "bad_stretch": mutate(["verify", "radial_stretch"], -1.0),
    "tolerance": mutate(["verify", "tolerance"], 1e-3),
    "empty_dir": mutate(["output", "directory"], ""),
    "bad_samples": mutate(["z", "samples"], 1),
    "unknown_kind": mutate(["field", "kind"], "dipole"),
})

failures = 0
for name, doc in cases.items():
    schema_ok = validator.is_valid(doc)
    path = scratch / f"{name}.json"
    path.write_text(json.dumps(doc))
    run = subprocess.run([cli, "--config", str(path), "--out", str(scratch / "out"), "field"],
                         capture_output=True, text=True)
    cli_ok = run.returncode == 0
    if run.returncode not in (0, 2):
        print(f"{name}: unexpected exit {run.returncode}: {run.stderr.strip()}")
        failures += 1
    elif schema_ok != cli_ok:
        print(f"{name}: schema {'accepts' if schema_ok else 'rejects'}, parser {'accepts' if cli_ok else 'rejects'}"
              f" {run.stderr.strip()}")
        failures += 1
    else:
        print(f"{name}: {'valid' if schema_ok else 'invalid'} in both")
print(f"{failures} mismatches over {len(cases)} documents")
sys.exit(1 if failures else 0)
