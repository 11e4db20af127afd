"""Benchmark split builders for the three one-class evaluation settings.

All builders key their random substreams by class name and operate on
sorted class names, so the splits are invariant to input ordering and
fully determined by the seed.  Row indices into the source sets are kept
on each split so train/test disjointness stays checkable.
"""

from dataclasses import dataclass

import numpy as np

from .data import FeatureSet
from .exceptions import ProtocolError


@dataclass
class ProtocolSplit:
    class_tag: str
    train: FeatureSet
    target_test: FeatureSet
    negative_test: FeatureSet
    train_indices: np.ndarray
    test_indices: np.ndarray


def _split_indices(rng, n, n_test):
    perm = rng.permutation(n)
    return np.sort(perm[n_test:]), np.sort(perm[:n_test])


def build_abnormality_protocol(normal, abnormal, rng):
    """Balanced normal/abnormal test sets, one split per normal class.

    Per class, the test partition size is min(pool size, half the class),
    an equal-sized abnormal sample is drawn from the shared pool, and the
    remaining normal rows form the train set.
    """
    if not normal:
        raise ProtocolError("no normal classes given")
    splits = []
    for name in sorted(normal):
        fs = normal[name]
        sub = rng.substream(f"abnormality:{name}")
        n_test = min(abnormal.n, fs.n // 2)
        if n_test < 1:
            raise ProtocolError(
                f"class {name!r}: cannot balance test sets (normal rows "
                f"{fs.n}, abnormal pool {abnormal.n}; need >= 2 normal "
                f"rows and >= 1 abnormal row)")
        train_idx, test_idx = _split_indices(sub, fs.n, n_test)
        neg_idx = sub.choice_without_replacement(abnormal.n, n_test)
        splits.append(ProtocolSplit(
            class_tag=name,
            train=fs.take(train_idx, source=f"{name}/train"),
            target_test=fs.take(test_idx, source=f"{name}/test"),
            negative_test=abnormal.take(neg_idx, source=f"{name}/abnormal"),
            train_indices=train_idx,
            test_indices=test_idx,
        ))
    return splits


def build_auth_protocol(per_user, rng):
    """80/20 per-user splits; negatives are the other users' test parts.

    Fractional boundaries round toward train (test = n // 5).
    """
    if len(per_user) < 2:
        raise ProtocolError(f"need >= 2 users, got {len(per_user)}")
    names = sorted(per_user)
    parts = {}
    for name in names:
        fs = per_user[name]
        n_test = fs.n // 5
        if n_test < 1:
            raise ProtocolError(
                f"user {name!r}: {fs.n} rows leaves an empty 20% test set")
        sub = rng.substream(f"auth:{name}")
        train_idx, test_idx = _split_indices(sub, fs.n, n_test)
        parts[name] = (train_idx, test_idx)

    splits = []
    for name in names:
        fs = per_user[name]
        train_idx, test_idx = parts[name]
        negatives = np.vstack([
            per_user[other].data[parts[other][1]]
            for other in names if other != name])
        splits.append(ProtocolSplit(
            class_tag=name,
            train=fs.take(train_idx, source=f"{name}/train"),
            target_test=fs.take(test_idx, source=f"{name}/test"),
            negative_test=FeatureSet(negatives, source=f"{name}/others-test"),
            train_indices=train_idx,
            test_indices=test_idx,
        ))
    return splits


def build_novelty_protocol(per_class, rng, novel_per_class=50):
    """First half of the sorted classes are targets, the rest are novel.

    Each target class splits 50/50 into train/test (odd rows round toward
    train); every split shares one negative test set holding up to
    novel_per_class rows from each novel class.
    """
    names = sorted(per_class)
    if len(names) < 2 or len(names) % 2 != 0:
        raise ProtocolError(
            f"need an even class count >= 2, got {len(names)}")
    half = len(names) // 2
    target_names, novel_names = names[:half], names[half:]

    novel_rows = []
    for name in novel_names:
        fs = per_class[name]
        take = min(novel_per_class, fs.n)
        idx = rng.substream(f"novelty:novel:{name}").choice_without_replacement(
            fs.n, take)
        novel_rows.append(fs.data[np.sort(idx)])
    negative = FeatureSet(np.vstack(novel_rows), source="novel-pool")

    splits = []
    for name in target_names:
        fs = per_class[name]
        n_test = fs.n // 2
        if n_test < 1:
            raise ProtocolError(f"class {name!r}: {fs.n} rows cannot split 50/50")
        sub = rng.substream(f"novelty:target:{name}")
        train_idx, test_idx = _split_indices(sub, fs.n, n_test)
        splits.append(ProtocolSplit(
            class_tag=name,
            train=fs.take(train_idx, source=f"{name}/train"),
            target_test=fs.take(test_idx, source=f"{name}/test"),
            negative_test=negative,
            train_indices=train_idx,
            test_indices=test_idx,
        ))
    return splits
