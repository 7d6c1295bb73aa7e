"""Walk through box fusion on a small hand-built example.

Three models look at the same image. Two of them find the dog in roughly
the same place; one also hallucinates a cat in the corner. Fusion should
collapse the two dog boxes into one cluster and keep the cat separate.
"""

from detfuse import Box, Detection, PROB_MAX, merge_boxes

detections = [
    Detection(Box(100, 100, 200, 180), class_id=0, prob=0.90, model_id=0),
    Detection(Box(104, 97, 205, 184), class_id=0, prob=0.75, model_id=1),
    Detection(Box(400, 10, 440, 50), class_id=1, prob=0.30, model_id=2),
]

print("input detections:")
for d in detections:
    print(f"  model {d.model_id}: class {d.class_id} p={d.prob:.2f} box={d.box.as_tuple()}")

print("\ndefault probability rule (max / cluster size):")
for s in merge_boxes(detections, iou_threshold=0.5):
    x1, y1, x2, y2 = (round(v, 2) for v in s.box.as_tuple())
    print(f"  class {s.class_id} p={s.prob:.3f} support={s.support} "
          f"box=({x1}, {y1}, {x2}, {y2})")

print("\nplain-max probability rule (corroboration never lowers the score):")
for s in merge_boxes(detections, iou_threshold=0.5, prob_mode=PROB_MAX):
    x1, y1, x2, y2 = (round(v, 2) for v in s.box.as_tuple())
    print(f"  class {s.class_id} p={s.prob:.3f} support={s.support} "
          f"box=({x1}, {y1}, {x2}, {y2})")

print("\nNote how the merged box is a probability-weighted average of its")
print("members, so the stronger model pulls the result toward its corners.")
