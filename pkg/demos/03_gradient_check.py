"""Verify the hand-derived backpropagation against finite differences.

Every gradient in the model (both LSTM directions, unrolled through
time, plus the three head layers) is derived analytically. This demo
perturbs random coordinates of every tensor and compares the analytical
gradient with a central finite difference of the end-to-end loss.

Run:  python demos/03_gradient_check.py
"""

import numpy as np

from coursecast import nnet

rng = np.random.default_rng(0)
dims = nnet.ModelDims(C=3, H=4, K=3, M=4)
params = nnet.init_params(dims, seed=1)

history = np.zeros((3, dims.input_size))
for t in range(3):
    for course in rng.choice(dims.C, size=2, replace=False):
        history[t, course * 4 + rng.integers(0, 4)] = 1.0
query = np.zeros(dims.C)
query[rng.choice(dims.C, size=2, replace=False)] = 1.0
label = 1

probability, trace = nnet.bidi_forward(params, history, query)
grads = nnet.backward(params, trace, label)
print(f"forward probability: {probability:.6f}")

step = 1e-5
print(f"\n{'tensor':<10} {'coords':>6} {'worst rel err':>14}")
for name, array in params.named_tensors():
    flat = array.ravel()
    analytic = grads[name].ravel()
    coords = rng.choice(flat.size, size=min(flat.size, 40), replace=False)
    worst = 0.0
    for i in coords:
        keep = flat[i]
        flat[i] = keep + step
        up, _ = nnet.bidi_forward(params, history, query)
        flat[i] = keep - step
        down, _ = nnet.bidi_forward(params, history, query)
        flat[i] = keep
        fd = (nnet.bce_loss(up, label) - nnet.bce_loss(down, label)) / (2 * step)
        worst = max(worst, abs(fd - analytic[i]) / max(abs(fd), abs(analytic[i]), 1e-8))
    print(f"{name:<10} {len(coords):>6} {worst:>14.2e}")

print("\nanything below 1e-4 means the analytical gradients are exact"
      " up to finite-difference truncation.")
