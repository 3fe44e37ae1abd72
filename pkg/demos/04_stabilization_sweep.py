"""Effect of the stabilization parameter.

For u = sin(pi x) sin(pi y), beta = [1, 1], c = -1 on the unit square the
scheme is run with tau in {0, 0.001, 1, 1000}.  Tiny tau barely moves the
numbers, moderate tau behaves the same, and very large tau raises the
absolute error while the rate stays at least first order: a moderate tau
is the practical choice.

Run:  PYTHONPATH=src python3 demos/04_stabilization_sweep.py
"""

from pdwg.catalog import get_experiment
from pdwg.study import run_study

NAMES = ("table9", "table10", "table11", "table12")

reports = {}
for name in NAMES:
    exp = get_experiment(name)
    reports[name] = run_study(exp, levels=(0, 4))
    print(f"== {exp.description}")
    print(reports[name].table())
    print()

line = "tau:        " + "".join(f"{get_experiment(n).spec.tau:>12g}" for n in NAMES)
print(line)
for i, row in enumerate(reports[NAMES[0]].rows):
    errs = "".join(f"{reports[n].rows[i].err_u:>12.4e}" for n in NAMES)
    print(f"1/h = {row.inv_h:<5d}" + errs)
