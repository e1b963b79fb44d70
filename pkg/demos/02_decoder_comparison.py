"""Benchmark the three decoders on seeded synthetic suites.

Reproduces the qualitative story of the decoder ablation at desk scale:
sub-pixel refinement beats the fixed 0.25-px shift, which beats raw argmax,
on clean heatmaps and under prediction-like noise.
"""

import hmcodec as hc

LAM = 4.0
SIGMA = hc.GaussianParams(2.0)

methods = [
    hc.DecodeConfig(method="argmax", lam=LAM),
    hc.DecodeConfig(method="standard_shift", lam=LAM),
    hc.DecodeConfig(method="dark", modulate=False, sigma=SIGMA, lam=LAM),
    hc.DecodeConfig(method="dark", modulate=True, sigma=SIGMA, lam=LAM),
]
labels = ["argmax", "shift", "dark", "dark_modulated"]

suites = {
    "noiseless": hc.NoiseModel(),
    "gaussian noise (2% of peak)": hc.NoiseModel(kind="gaussian_additive", amplitude=0.02),
    "impulse noise (spikes at 50% of peak)": hc.NoiseModel(kind="impulse", amplitude=0.5, density=0.02),
}

for title, noise in suites.items():
    spec = hc.TrialSpec(
        count=2000, height=48, width=64, sigma_range=(1.0, 3.0), lam=LAM,
        encoding_mode="unbiased", noise=noise, seed=11,
    )
    stats = hc.evaluate(spec, methods)
    print(f"== {title} (2000 trials, errors in original-image px) ==")
    print(hc.compare_report(stats, labels))
    print()

print("impulse spikes break the single-peak assumption behind the Newton step;")
print("smoothing the distribution first (dark_modulated) repairs most of the damage.")
