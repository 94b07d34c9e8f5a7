"""End-to-end checks of the bootbayes command line."""
import json
import os
import random
import subprocess
import sys
import tempfile
from pathlib import Path

EXE = sys.argv[1]
failures = []


def run(args, env=None, cwd=None):
    full_env = dict(os.environ)
    full_env.pop("BOOTBAYES_THREADS", None)
    full_env.update(env or {})
    return subprocess.run([EXE, *args], capture_output=True, text=True, env=full_env, cwd=cwd)


def check(name, ok, detail=""):
    print(("ok   " if ok else "FAIL ") + name + ("" if ok else f": {detail}"))
    if not ok:
        failures.append(name)


tmp = Path(tempfile.mkdtemp(prefix="bootbayes_cli_"))

# validation errors
r = run(["prostate", "--out", str(tmp / "p")])
check("missing --zfile exits 2", r.returncode == 2, r.returncode)
check("missing --zfile is named", "--zfile" in r.stderr, r.stderr)
r = run(["correlation", "--level", "1.5", "--out", str(tmp / "c")])
check("--level 1.5 exits 2", r.returncode == 2, r.returncode)
r = run(["correlation", "--B", "0", "--out", str(tmp / "c")])
check("--B 0 exits 2", r.returncode == 2, r.returncode)
r = run(["correlation", "--B", "200", "--out", str(tmp / "c")], env={"BOOTBAYES_THREADS": "zero"})
check("bad BOOTBAYES_THREADS exits 2", r.returncode == 2, r.returncode)
r = run(["nosuch"])
check("unknown subcommand exits 2", r.returncode == 2, r.returncode)
(tmp / "bad.json").write_text("{not json")
r = run(["run", "--spec", str(tmp / "bad.json"), "--out", str(tmp / "r")])
check("malformed spec exits 2", r.returncode == 2, r.returncode)

# correlation report
r = run(["correlation", "--B", "2000", "--out", str(tmp / "corr")])
check("correlation exits 0", r.returncode == 0, r.stderr)
rep = json.loads((tmp / "corr" / "report.json").read_text())
for key in ["exact_ci", "jeffreys_ci", "bca_ci", "rbd", "seed", "B", "K", "version"]:
    check(f"correlation report has {key}", key in rep)
check("stdout is the report", json.loads(r.stdout) == rep)
store = tmp / "corr" / "store_correlation.csv"
check("store written", store.exists())
check("store has json metadata line", store.read_text().startswith("#") and
      json.loads(store.read_text().splitlines()[0][1:].strip())["seed"] == rep["seed"])
dens = sorted((tmp / "corr").glob("density_*.csv"))
dlines = dens[0].read_text().splitlines() if dens else ["", ""]
check("density csvs written", len(dens) >= 2 and dlines[1] == "grid,density")
check("density csv provenance", dlines[0].startswith("#") and
      set(json.loads(dlines[0][1:])) == {"seed", "B", "K", "version"})

# thread-count independence via the environment
a = run(["eigenratio", "--B", "1000", "--out", str(tmp / "e1")], env={"BOOTBAYES_THREADS": "1"})
b = run(["eigenratio", "--B", "1000", "--out", str(tmp / "e4")], env={"BOOTBAYES_THREADS": "4"})
check("eigenratio runs", a.returncode == 0 and b.returncode == 0, a.stderr + b.stderr)
check("BOOTBAYES_THREADS does not change results",
      (tmp / "e1" / "report.json").read_text() == (tmp / "e4" / "report.json").read_text())
check("stores identical across threads",
      (tmp / "e1" / "store_eigenratio.csv").read_bytes() == (tmp / "e4" / "store_eigenratio.csv").read_bytes())

# csv summary format
r = run(["eigenratio", "--B", "500", "--format", "csv", "--out", str(tmp / "ecsv")])
lines = (tmp / "ecsv" / "summaries.csv").read_text().splitlines()
check("csv summaries", r.returncode == 0 and lines[0].startswith("statistic,prior,estimate") and len(lines) == 5)

# run: store reuse and prior switching
spec = tmp / "gamma.json"
spec.write_text(json.dumps({"family": "gamma_scale", "n": 10, "beta_hat": [1.0]}))
out = tmp / "run"
r1 = run(["run", "--spec", str(spec), "--B", "1500", "--prior", "jeffreys", "--out", str(out)])
r2 = run(["run", "--spec", str(spec), "--B", "1500", "--prior", "bca", "--K", "10", "--out", str(out)])
check("run exits 0", r1.returncode == 0 and r2.returncode == 0, r1.stderr + r2.stderr)
check("first run writes the store", "wrote replication store" in r1.stderr, r1.stderr)
check("second run reuses the store", "reusing replication store" in r2.stderr, r2.stderr)
j1, j2 = json.loads(r1.stdout), json.loads(r2.stdout)
check("store hash stable", j1["store_hash"] == j2["store_hash"])
check("jeffreys and bca summaries differ", j1["summaries"][0]["estimate"] != j2["summaries"][0]["estimate"])
check("bca summary carries constants", "bca" in j2["summaries"][0])
check("accuracy report has q_k", len(j2["accuracy"][0]["q_k"]) == 10)
for key in ["seed", "B", "K", "version"]:
    check(f"run report has {key}", key in j2)
r3 = run(["run", "--spec", str(spec), "--B", "1500", "--seed", "7", "--out", str(out)])
check("changed seed regenerates", "wrote replication store" in r3.stderr, r3.stderr)

# prostate on synthetic z-values
rng = random.Random(3)
zfile = tmp / "z.txt"
zfile.write_text("\n".join(f"{rng.gauss(0, 1) + (3 if rng.random() < 0.05 else 0):.6f}" for _ in range(3000)) + "\n")
r = run(["prostate", "--zfile", str(zfile), "--B", "300", "--K", "5", "--out", str(tmp / "pro")])
check("prostate exits 0", r.returncode == 0, r.stderr)
if r.returncode == 0:
    rep = json.loads(r.stdout)
    check("prostate table has 7 models", len(rep["table"]) == 7)
    check("prostate provenance", all(k in rep for k in ["seed", "B", "K", "version"]))
r = run(["prostate", "--zfile", str(zfile), "--bins", "1,2", "--out", str(tmp / "pro2")])
check("bad --bins exits 2", r.returncode == 2, r.returncode)

# numerical failure: gamma with n = 1 has a large enough acceleration that 1 + a z < 0
g1 = tmp / "g1.json"
g1.write_text(json.dumps({"family": "gamma_scale", "n": 1, "beta_hat": [1.0]}))
r = run(["run", "--spec", str(g1), "--B", "4000", "--prior", "bca", "--out", str(tmp / "g1")])
check("undefined BCa weights exit 3", r.returncode == 3, r.returncode)
check("numerical failure has a diagnostic", "1 + a z" in r.stderr, r.stderr)

nt = tmp / "nt.json"
nt.write_text(json.dumps({"family": "normal_translation", "sigma": [[1.0]], "beta_hat": [0.0]}))
r = run(["run", "--spec", str(nt), "--B", "200", "--truncate", "0.0", "--out", str(tmp / "nt")])
check("truncate outside (0, 1] exits 2", r.returncode == 2, r.returncode)

print(f"{len(failures)} failure(s)")
sys.exit(1 if failures else 0)
