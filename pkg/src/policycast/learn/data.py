from dataclasses import dataclass

import numpy as np

from ..corpus import Corpus, encode_covariates, feature_names, national_threshold


@dataclass(frozen=True)
class Dataset:
    features: np.ndarray
    targets: np.ndarray
    feature_names: tuple[str, ...]
    ids: tuple[str, ...] = ()

    def __post_init__(self):
        if self.features.ndim != 2:
            raise ValueError("features must be a 2-d matrix")
        if self.features.shape[0] != self.targets.shape[0]:
            raise ValueError("row count of features must equal target length")
        if self.features.shape[1] != len(self.feature_names):
            raise ValueError("one name per feature column required")
        if not np.isin(self.features, (0, 1)).all():
            raise ValueError("features must be binary")

    def __len__(self):
        return self.features.shape[0]

    def select(self, names) -> "Dataset":
        """Restrict to a subset of named feature columns."""
        cols = [self.feature_names.index(n) for n in names]
        return Dataset(self.features[:, cols], self.targets, tuple(names), self.ids)

    def shuffled(self, rng) -> "Dataset":
        """Copy with the targets permuted (destroys any feature/label signal)."""
        return Dataset(self.features, rng.permutation(self.targets), self.feature_names, self.ids)


def build_dataset(corpus: Corpus, target: str = "national") -> Dataset:
    """Encode a corpus for classification (``national``) or threshold regression."""
    if target not in ("national", "threshold"):
        raise ValueError(f"unknown target {target!r}")
    policies = corpus.policies
    if target == "threshold":
        policies = [p for p in policies if p.national_year is not None]
    rows = [encode_covariates(p, corpus.trait_tables).values for p in policies]
    X = np.array(rows, dtype=np.float64).reshape(len(rows), -1)
    if target == "national":
        y = np.array([int(p.national_year is not None) for p in policies], dtype=np.int64)
    else:
        y = np.array([national_threshold(p) for p in policies], dtype=np.float64)
    names = feature_names(corpus.trait_tables)
    if not rows:
        X = np.zeros((0, len(names)))
    return Dataset(X, y, names, tuple(p.id for p in policies))
