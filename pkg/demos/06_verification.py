"""Installation check: run every verification suite on a tiny lattice."""

from latticecond import ModelParams, run_verification

report = run_verification(ModelParams(lam=1, Ux=10, Uy=10, N=2, Q=5, J=5), level="quick")
print(report)
print(f"took {report.seconds:.2f} s")
