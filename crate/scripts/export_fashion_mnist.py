#!/usr/bin/env python3
"""Export desk-scale Fashion-MNIST subsets as gzipped dense CSV.

The images come from the `fashion-mnist` npm package, which ships all 70 000
images as one JSON file per class. Two files are written:

  data/fashion_mnist_10k.csv.gz        1000 images per class, 10 classes
  data/fashion_mnist_dress_2000.csv.gz 2000 images of the Dress class

Columns are p0..p783 (raw 0-255 pixel intensities) followed by `label`.

Usage:
  python3 scripts/export_fashion_mnist.py [--tarball fashion-mnist-1.1.0.tgz]
"""

import argparse
import gzip
import io
import json
import os
import tarfile
import urllib.request

import numpy as np

TARBALL_URL = "https://registry.npmjs.org/fashion-mnist/-/fashion-mnist-1.1.0.tgz"
CLASS_NAMES = [
    "T-shirt/top",
    "Trouser",
    "Pullover",
    "Dress",
    "Coat",
    "Sandal",
    "Shirt",
    "Sneaker",
    "Bag",
    "Ankle boot",
]
DRESS = 3


def load_classes(tarball):
    if tarball is None:
        with urllib.request.urlopen(TARBALL_URL) as resp:
            blob = resp.read()
    else:
        with open(tarball, "rb") as fh:
            blob = fh.read()
    classes = {}
    with tarfile.open(fileobj=io.BytesIO(blob), mode="r:gz") as tar:
        for c in range(10):
            member = tar.extractfile(f"package/src/clothes/{c}.json")
            rows = json.load(member)["data"]
            # a couple of records in the package are empty
            classes[c] = np.array([r for r in rows if len(r) == 784], dtype=np.uint8)
    return classes


def write_csv(path, images, labels):
    header = ",".join(f"p{i}" for i in range(784)) + ",label\n"
    with gzip.open(path, "wt", encoding="utf-8", newline="") as fh:
        fh.write(header)
        for img, label in zip(images, labels):
            fh.write(",".join(map(str, img.tolist())))
            fh.write(",")
            fh.write(label)
            fh.write("\n")


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--tarball", help="local copy of the npm tarball")
    ap.add_argument("--out-dir", default=os.path.join(os.path.dirname(__file__), "..", "data"))
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    classes = load_classes(args.tarball)
    rng = np.random.default_rng(args.seed)
    os.makedirs(args.out_dir, exist_ok=True)

    # interleave classes so the file is not sorted by label
    picks = []
    for c in range(10):
        idx = rng.choice(len(classes[c]), size=1000, replace=False)
        picks.extend((c, i) for i in idx)
    order = rng.permutation(len(picks))
    images = [classes[picks[o][0]][picks[o][1]] for o in order]
    labels = [CLASS_NAMES[picks[o][0]] for o in order]
    write_csv(os.path.join(args.out_dir, "fashion_mnist_10k.csv.gz"), images, labels)

    idx = rng.choice(len(classes[DRESS]), size=2000, replace=False)
    write_csv(
        os.path.join(args.out_dir, "fashion_mnist_dress_2000.csv.gz"),
        classes[DRESS][idx],
        [CLASS_NAMES[DRESS]] * 2000,
    )


if __name__ == "__main__":
    main()
