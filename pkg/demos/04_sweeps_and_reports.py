# Running the verification sweeps programmatically and writing the reports
# that the `glkloosterman check` subcommand produces.
# Run with: python3 demos/04_sweeps_and_reports.py [outdir]

import pathlib
import sys

from glkloosterman.bounds import germ_decay_sweep, rows_to_csv, run_sweep

out = pathlib.Path(sys.argv[1] if len(sys.argv) > 1 else "demo_reports")
out.mkdir(exist_ok=True)

# %% the orbit identity over a small grid; infeasible unit choices show up as "skipped"
summary = run_sweep({
    "check": "stevens",
    "grid": {"n": [2, 3], "p": [2, 3], "a": [1, 2], "m": [1]},
    "out_json": str(out / "stevens.json"),
    "out_csv": str(out / "stevens.csv"),
})
print({k: v for k, v in summary.items() if k != "rows"})

# %% the GL(3) bound: ratios are tiny because the constant is huge
summary = run_sweep({"check": "thm-wn", "grid": {"n": [3], "p": [2, 3], "a": [1, 2]}})
print(rows_to_csv(summary["rows"][:5]))

# %% normalised germ values along a ray, weighted by Delta^(1/2 - delta)
rows = germ_decay_sweep(2, 0.05, [(k,) for k in range(1, 6)], {"p": 3, "units": (1, -1)})
for r in rows:
    print(r.a, f"{r.magnitude:.4f}")
