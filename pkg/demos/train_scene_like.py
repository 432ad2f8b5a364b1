"""Train a neural tree and a plain GNN on the same synthetic scene graphs.

    python3 demos/train_scene_like.py [num_graphs]

Uses a small model and few epochs so it finishes in seconds; the
acceptance suite runs the full ten-seed comparison.
"""

import sys

from neuraltree import nn, pipeline as pl

num_graphs = int(sys.argv[1]) if len(sys.argv) > 1 else 60
ds = pl.generate_synthetic("scene_like", {"num_graphs": num_graphs}, seed=0)
htrees = pl.htrees_for(ds)
print(f"{len(ds.graphs)} graphs, {ds.num_outputs} nodes,",
      f"mean H-tree diameter {pl.mean_htree_diameter(htrees):.2f}")
print(f"majority-class accuracy {pl.majority_baseline(ds, seed=0):.3f}")

for arch in pl.ARCHITECTURES:
    cfg = pl.TrainConfig(model=nn.ModelConfig(hidden_dim=16, iterations=None, seed=0),
                         architecture=arch, epochs=150, patience=50, seed=0)
    rep = pl.train(ds, cfg)
    print(f"{arch:12s} T={rep.iterations} best epoch {rep.best_epoch:3d}",
          f"test accuracy {rep.test_metric:.3f}")
