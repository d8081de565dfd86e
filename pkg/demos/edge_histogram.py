"""Shape of the spectral edge: histogram of the top n^0.7 eigenvalues.

Eigenvalues are divided by lambda_2 and binned on [0, 1].  Density grows
toward the bulk (smaller x) and stops near sqrt(1 - 0.7), where the window
of computed eigenvalues ends.
Uses a smaller n than the full experiment so it runs in seconds.
"""

from ersparse.experiments import load_config, run_experiment

cfg = load_config(None, {"experiment": "figure1", "n": "10000", "d_list": "1.5", "bins": "20"})
res = run_experiment(cfg)
per = res.summary["per_d"][0]
hist = res.tables["figure1_d1.5_histogram"].rows
dens = res.tables["figure1_d1.5_density"].rows
print(f"n={cfg.n} d=1.5: {per['num_eigenvalues']} eigenvalues, lambda_1={per['lambda_1']:.3f}, "
      f"window starts at {per['theory_window_start']:.3f}")
peak = max(r[3] for r in hist) or 1.0
for (lo, hi, count, density), (_, _, _, predicted) in zip(hist, dens):
    bar = "#" * round(30 * density / peak)
    print(f"[{lo:.2f},{hi:.2f}) {count:>4} {density:6.2f} pred {predicted:6.2f} {bar}")
for c in per["counting"]:
    print(f"x={c['x']}: log N / log n = {c['exponent']:.3f}, predicted {c['predicted']:.3f}")
