"""Walk through the grid-cell detection loss and its gradient.

A single responsible predictor that matches its target exactly has zero
loss. Nudging its width shows the square-root term at work: the loss
penalty for the same absolute error is larger on a small box.
"""

import dataclasses

from detfuse import CellBoxPrediction, CellBoxTarget, LossWeights, yolo_loss, yolo_loss_grad

target = CellBoxTarget(x=0.5, y=0.5, w=0.2, h=0.3, responsible=True,
                       target_conf=1.0, target_class=1)
perfect = CellBoxPrediction(x=0.5, y=0.5, w=0.2, h=0.3, conf=1.0,
                            class_probs=(0.0, 1.0, 0.0))

grid = [[perfect]]
targets = [[target]]
out = yolo_loss(grid, targets)
print(f"perfect match: total loss = {out.total!r}")

for dw in (0.05, 0.10):
    nudged = dataclasses.replace(perfect, w=perfect.w + dw)
    out = yolo_loss([[nudged]], targets)
    print(f"width off by {dw:+.2f}: total = {out.total:.6f} "
          f"(center={out.err_center:.4f} wh={out.err_wh:.6f} "
          f"class={out.err_class:.4f} conf={out.err_conf:.4f})")

# the analytic gradient points back toward the target
nudged = dataclasses.replace(perfect, w=0.3, conf=0.8)
grads = yolo_loss_grad([[nudged]], targets, LossWeights())
g = grads[0][0]
print(f"\ngradient at w=0.3, conf=0.8: d/dw = {g.w:.6f}, d/dconf = {g.conf:.6f}")
print("positive d/dw means shrinking the box reduces the loss, as expected.")

# a non-responsible predictor is only pushed toward zero confidence
quiet_target = CellBoxTarget(x=0, y=0, w=0, h=0, responsible=False)
noisy = CellBoxPrediction(x=0.9, y=0.1, w=0.5, h=0.5, conf=0.6,
                          class_probs=(0.2, 0.3, 0.5))
g = yolo_loss_grad([[noisy]], [[quiet_target]], LossWeights())[0][0]
print(f"\nnon-responsible predictor: d/dx = {g.x!r}, d/dconf = {g.conf:.4f}")
print("only the confidence term is active, scaled by the no-object weight 0.5.")
