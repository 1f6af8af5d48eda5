"""
Training a small network with the from-scratch core
===================================================

Everything in ``botgan`` runs on one tiny dense-network engine. Here we build
a two-layer classifier, check its gradients against finite differences and
fit it with Adam on a toy problem.
"""

import numpy as np

from botgan import nncore

rng = np.random.default_rng(0)

###############################################################################
# A 2 -> 16 -> 1 network with a relu hidden layer and a raw logit output.
specs = nncore.dense_specs([2, 16, 1], hidden="relu", output="identity")
params = nncore.init_mlp(specs, rng)
print("parameters:", params.n_params())

###############################################################################
# Points inside the unit circle are class 1.
x = rng.uniform(-1.5, 1.5, (512, 2))
y = (np.sum(x**2, axis=1) < 1.0).astype(float)

###############################################################################
# Backprop versus a central difference on one weight.
out, cache = nncore.forward(params, x[:8])
loss, g = nncore.bce_with_logits(out[:, 0], y[:8])
grads = nncore.backward(params, cache, g[:, None])
h = 1e-6
w = params.weights[0]
w[0, 0] += h
lp, _ = nncore.bce_with_logits(nncore.predict(params, x[:8])[:, 0], y[:8])
w[0, 0] -= 2 * h
lm, _ = nncore.bce_with_logits(nncore.predict(params, x[:8])[:, 0], y[:8])
w[0, 0] += h
print(f"backprop {grads.weights[0][0, 0]:.8f}  finite difference {(lp - lm) / (2 * h):.8f}")

###############################################################################
# Full-batch Adam for a few hundred steps.
state = nncore.init_adam(params, learning_rate=0.01)
for step in range(400):
    out, cache = nncore.forward(params, x)
    loss, g = nncore.bce_with_logits(out[:, 0], y)
    params, state = nncore.adam_step(params, nncore.backward(params, cache, g[:, None]), state)
    if step % 100 == 0:
        print(f"step {step:3d}  loss {loss:.4f}")

acc = np.mean((nncore.predict(params, x)[:, 0] > 0) == (y == 1))
print(f"training accuracy {acc:.3f}")
