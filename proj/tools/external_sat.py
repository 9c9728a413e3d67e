#!/usr/bin/env python3
# Copyright 2026 The tdsm Authors
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.

"""Runs an off-the-shelf CDCL solver (python-sat) on a DIMACS file.

Prints SAT-competition style output ("s SATISFIABLE" / "s UNSATISFIABLE",
"v ..." model lines) and exits with 10 / 20, or 0 when undecided.
"""

import argparse
import sys

from pysat.formula import CNF
from pysat.solvers import Solver


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("cnf")
    parser.add_argument("--solver", default="cadical153")
    args = parser.parse_args()

    formula = CNF(from_file=args.cnf)
    with Solver(name=args.solver, bootstrap_with=formula.clauses) as solver:
        result = solver.solve()
        if result is None:
            print("s UNKNOWN")
            return 0
        if not result:
            print("s UNSATISFIABLE")
            return 20
        print("s SATISFIABLE")
        model = solver.get_model()
        for start in range(0, len(model), 20):
            print("v " + " ".join(str(lit) for lit in model[start:start + 20]))
        print("v 0")
        return 10


if __name__ == "__main__":
    sys.exit(main())
