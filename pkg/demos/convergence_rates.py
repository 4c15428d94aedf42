"""Small convergence study: graph Poisson solutions against the continuum
reference on an (eps, n) ladder, run through the experiment harness."""

import tempfile

from rgglearn import ExperimentConfig, run_convergence, run_mollification_rate

outdir = tempfile.mkdtemp(prefix="rgglearn-demo-")
print("writing results under %s" % outdir)

# error falls as n grows at fixed eps (sampling noise dies out)
cfg = ExperimentConfig(overrides={
    "run.outdir": outdir + "/by-n",
    "run.seeds": "3",
    "ladder.eps": "0.08",
    "ladder.n_rule": "list",
    "ladder.n_list": "1000 4000 16000",
    "ladder.k_rule": "fixed",
    "ladder.k": "0",
})
res = run_convergence(cfg)
print("fixed eps = 0.08, growing n:")
for n in (1000, 4000, 16000):
    print("   n = %5d   median L1 error %.4f" % (n, res.medians[n]))

# eps ladder with heat smoothing at the prescribed step count; the
# acceptance suite runs the same ladder with 45 seeds for stable medians
cfg = ExperimentConfig(overrides={
    "run.outdir": outdir + "/by-eps",
    "run.seeds": "9",
    "domain.density": "affine",
    "domain.slope": "0.8",
    "ladder.eps": "0.15 0.11 0.08 0.06",
    "ladder.n_rule": "power",
    "ladder.n_const": "8000",
    "ladder.n_power": "0",
    "ladder.k_rule": "cor52",
})
res = run_convergence(cfg)
print("eps ladder at n = 8000, affine density:")
for eps in sorted(res.medians, reverse=True):
    print("   eps = %.2f   median L1 error %.4f" % (eps, res.medians[eps]))
print("fitted rate %.3f (log-log slope, +-%.3f; noisy at this seed count)"
      % (res.slope, res.slope_band))

# smoothing error grows like (eps sqrt(k))^2 until eps_k hits the diameter
cfg = ExperimentConfig(overrides={
    "run.outdir": outdir + "/by-k",
    "run.experiment": "mollify",
    "run.seeds": "3",
    "ladder.eps": "0.05",
    "ladder.n_rule": "power",
    "ladder.n_const": "8000",
    "ladder.n_power": "0",
    "ladder.k_list": "4 16 64 256",
})
res = run_mollification_rate(cfg)
print("smoothing ladder |u - u_k| at n = 8000, eps = 0.05 (keyed by eps_k):")
for ek in sorted(res.medians):
    print("   eps_k = %.2f   median gap %.5f" % (ek, res.medians[ek]))
print("fitted order in eps_k: %.3f" % res.slope)
