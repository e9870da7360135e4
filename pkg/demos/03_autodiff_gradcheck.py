"""
Checking the autodiff engine
============================

Operations executed inside a ``Tape`` are recorded; ``tape.backward`` walks
them in reverse. Central finite differences give an independent answer.
"""
import numpy as np

from graphclf import autodiff as ad
from graphclf.autodiff import Parameter, Tape, Tensor

rng = np.random.default_rng(0)
x = Parameter(rng.normal(size=(5, 3)), name="x")
w = Parameter(rng.normal(size=(3, 4)), name="w")
seg = np.array([0, 0, 1, 1, 1])   # two "graphs" with 2 and 3 nodes
labels = np.array([1, 3])


def loss_fn():
    h = ad.tanh(ad.matmul(x, w))
    pooled = ad.segment_max(h, seg, 2)
    return ad.nll(ad.log_softmax_rows(pooled), labels)


with Tape() as tape:
    loss = loss_fn()
tape.backward(loss)
print("loss", loss.item())

for p in (x, w):
    num = ad.numerical_grad(lambda: loss_fn().item(), p)
    print(p.name, "relative error", ad.rel_error(p.grad, num))

###############################################################################
# One Adam step with weight decay moves the parameters against the gradient.
opt = ad.AdamState(lr=0.01, weight_decay=1e-3)
before = w.data.copy()
ad.adam_step(opt, [x, w])
print("w moved by", np.abs(w.data - before).max())
