"""The whole pipeline through the command-line interface.

Runs generate -> frontier (exact + reduced) -> bargain -> oracle -> report in
a scratch directory and prints what each artifact holds.  Every command is
seeded and deterministic: re-running this script reproduces every file
byte-for-byte apart from wall-time fields.
"""

import json
import os
import tempfile

from evshare.cli import run_cli

scratch = tempfile.mkdtemp(prefix="evshare-demo-")
os.chdir(scratch)
print(f"working in {scratch}\n")


def cli(*args):
    print("$ evshare " + " ".join(args))
    code = run_cli(list(args))
    assert code == 0, f"exit {code}"
    print()


cli("generate", "--ev-dist", "uniform", "--charger-layout", "centralized",
    "--n-evs", "2", "--n-chargers", "2", "--seed", "1037", "--horizon", "6",
    "--window", "3", "--earliest", "0", "3", "--demand", "1", "2",
    "--vot", "200", "--rental-fee", "400", "--out-dir", ".")

stem = "UniEV-CenChar-2-2-seed1037"
cli("frontier", "--instance", f"{stem}.json", "--method", "bbox", "--out-dir", ".")
cli("frontier", "--instance", f"{stem}.json", "--method", "b3m2",
    "--epsilon", "5", "--out-dir", ".")
cli("bargain", "--frontier", f"{stem}-b3m2-eps5-frontier.csv",
    "--instance", f"{stem}.json", "--mode", "gnb", "--pi", "0.5")
cli("oracle", "--instance", f"{stem}.json", "--out-dir", ".")
cli("report", "--batch", ".")

print("artifacts:")
for name in sorted(os.listdir(".")):
    print(f"  {name}")

print(f"\n{stem}-b3m2-eps5-frontier.csv:")
with open(f"{stem}-b3m2-eps5-frontier.csv") as handle:
    print(handle.read().rstrip())

with open(f"{stem}-b3m2-eps5-bargain.json") as handle:
    bargain = json.load(handle)
sel = bargain["selected"]
print(f"\nagreed point: ({sel['z1']}, {sel['z2']}) minor units "
      f"(assignment {sel['assignment_ref']})")

print(f"\nreport.csv:")
with open("report.csv") as handle:
    print(handle.read().rstrip())
