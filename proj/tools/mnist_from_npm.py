#!/usr/bin/env python3
"""Convert the digit JSON files shipped in the npm `mnist` package to IDX.

The package bundles 10,000 MNIST digits as flat arrays of 784 floats
(k/255 rounded to three decimals). This script restores the byte values,
shuffles the pool with a fixed seed and writes a train/test split as
gzip-compressed IDX3 image files plus IDX1 label files.

    npm pack mnist && tar xzf mnist-*.tgz
    python3 tools/mnist_from_npm.py package/src/digits data/desk
"""
import argparse
import gzip
import json
import pathlib
import struct

import numpy as np


def write_idx3(path, images):
    count, pixels = images.shape
    header = struct.pack(">IIII", 0x00000803, count, 28, 28)
    assert pixels == 28 * 28
    with gzip.GzipFile(path, "wb", mtime=0) as f:
        f.write(header)
        f.write(images.astype(np.uint8).tobytes())


def write_idx1(path, labels):
    header = struct.pack(">II", 0x00000801, len(labels))
    with gzip.GzipFile(path, "wb", mtime=0) as f:
        f.write(header)
        f.write(labels.astype(np.uint8).tobytes())


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("digits_dir", type=pathlib.Path)
    ap.add_argument("out_dir", type=pathlib.Path)
    ap.add_argument("--n-test", type=int, default=1000)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    images, labels = [], []
    for digit in range(10):
        flat = json.loads((args.digits_dir / f"{digit}.json").read_text())["data"]
        block = np.rint(np.asarray(flat, dtype=np.float64) * 255.0).reshape(-1, 784)
        images.append(block)
        labels.append(np.full(len(block), digit))
    images = np.clip(np.concatenate(images), 0, 255)
    labels = np.concatenate(labels)

    order = np.random.default_rng(args.seed).permutation(len(images))
    images, labels = images[order], labels[order]
    n_train = len(images) - args.n_test

    args.out_dir.mkdir(parents=True, exist_ok=True)
    write_idx3(args.out_dir / "train-images-idx3-ubyte.gz", images[:n_train])
    write_idx1(args.out_dir / "train-labels-idx1-ubyte.gz", labels[:n_train])
    write_idx3(args.out_dir / "t10k-images-idx3-ubyte.gz", images[n_train:])
    write_idx1(args.out_dir / "t10k-labels-idx1-ubyte.gz", labels[n_train:])
    print(f"wrote {n_train} train / {args.n_test} test images to {args.out_dir}")


if __name__ == "__main__":
    main()
