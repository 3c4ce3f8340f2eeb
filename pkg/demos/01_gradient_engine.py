"""A tour of the gradient engine: tensors, the tape, AdamW, and the schedule.

Run:  python3 demos/01_gradient_engine.py
"""

import numpy as np

from maskmatch.numerics import (
    GradTape,
    LrSchedule,
    OptimizerState,
    Tensor,
    adamw_step,
    cross_entropy,
    lr_at,
    matmul,
    softmax,
    tsum,
)

rng = np.random.default_rng(0)

# --- 1. record a computation on a tape, then run it backward ---------------

W = Tensor(rng.normal(size=(3, 4)), requires_grad=True)
x = Tensor(rng.normal(size=4))

with GradTape() as tape:
    logits = matmul(W, x)
    loss = cross_entropy(softmax(logits), 1)
tape.backward(loss)

print("loss:", round(loss.item(), 5))
print("dL/dW row norms:", np.linalg.norm(W.grad, axis=1).round(4))

# --- 2. verify one coordinate against a central finite difference ----------

h = 1e-6


def loss_at(weights):
    z = weights @ x.data
    z = z - z.max()
    p = np.exp(z) / np.exp(z).sum()
    return -np.log(p[1])


probe = W.data.copy()
probe[0, 2] += h
up = loss_at(probe)
probe[0, 2] -= 2 * h
down = loss_at(probe)
print("analytic grad:", round(W.grad[0, 2], 8), " finite diff:", round((up - down) / (2 * h), 8))

# --- 3. minimize a quadratic with AdamW -------------------------------------

target = np.array([1.0, -2.0, 0.5])
theta = {"theta": Tensor(np.zeros(3), requires_grad=True)}
state = OptimizerState(weight_decay=0.0)
schedule = LrSchedule(peak_lr=0.2, warmup_ratio=0.1, total_steps=200)

for step in range(1, 201):
    theta["theta"].zero_grad()
    with GradTape() as tape:
        diff = theta["theta"] - Tensor(target)
        quad = tsum(diff * diff)
    tape.backward(quad)
    adamw_step(theta, {"theta": theta["theta"].grad}, state, lr_t=lr_at(schedule, step))

print("recovered parameters:", theta["theta"].data.round(4), " target:", target)

# --- 4. the warmup/decay schedule shape -------------------------------------

sched = LrSchedule(peak_lr=1.0, warmup_ratio=0.2, total_steps=50)
curve = "".join("#" if lr_at(sched, s) > 0.5 else "." for s in range(51))
print("lr > 0.5 along the run:", curve)
