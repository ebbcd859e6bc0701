#!/usr/bin/env python3
# Copyright 2026 The DP-ULR Authors
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     https://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.
"""Builds the bundled 10k MNIST subset as gzipped IDX files.

Source: the `mnist` npm package (10,000 real MNIST digits stored as JSON,
pixels pre-scaled to [0, 1] and rounded to three decimals). Pixels are mapped
back to bytes with round(v * 255) and the examples are interleaved with a
fixed-seed shuffle so the files are not sorted by class.

    python3 tools/make_mnist_subset.py --package-dir /tmp/npm/package --out data
"""

import argparse
import gzip
import json
import os
import random
import struct
import subprocess
import tarfile
import tempfile


def fetch_package(workdir):
    subprocess.run(["npm", "pack", "mnist@1.1.0"], cwd=workdir, check=True,
                   stdout=subprocess.DEVNULL)
    with tarfile.open(os.path.join(workdir, "mnist-1.1.0.tgz")) as tar:
        tar.extractall(workdir)
    return os.path.join(workdir, "package")


def main():
    parser = argparse.ArgumentParser()
    parser.add_argument("--package-dir", default=None)
    parser.add_argument("--out", default="data")
    parser.add_argument("--seed", type=int, default=20240601)
    args = parser.parse_args()

    tmp = None
    pkg = args.package_dir
    if pkg is None:
        tmp = tempfile.TemporaryDirectory()
        pkg = fetch_package(tmp.name)

    examples = []
    for digit in range(10):
        with open(os.path.join(pkg, "src", "digits", f"{digit}.json")) as f:
            data = json.load(f)["data"]
        assert len(data) % 784 == 0
        for i in range(len(data) // 784):
            pixels = bytes(min(255, max(0, round(v * 255)))
                           for v in data[i * 784:(i + 1) * 784])
            examples.append((pixels, digit))
    random.Random(args.seed).shuffle(examples)

    os.makedirs(args.out, exist_ok=True)
    n = len(examples)
    images_path = os.path.join(args.out, "mnist10k-images-idx3-ubyte.gz")
    labels_path = os.path.join(args.out, "mnist10k-labels-idx1-ubyte.gz")
    # mtime=0 keeps the archives byte-reproducible.
    with gzip.GzipFile(images_path, "wb", mtime=0) as f:
        f.write(struct.pack(">IIII", 0x00000803, n, 28, 28))
        for pixels, _ in examples:
            f.write(pixels)
    with gzip.GzipFile(labels_path, "wb", mtime=0) as f:
        f.write(struct.pack(">II", 0x00000801, n))
        f.write(bytes(label for _, label in examples))
    print(f"wrote {n} examples to {args.out}")


if __name__ == "__main__":
    main()
