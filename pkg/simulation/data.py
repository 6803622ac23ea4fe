# -*- coding: utf-8 -*-
"""
Synthetic Regression Data

Gaussian-linear source and target domains, the OLS predictor trained on
them, and the absolute-residual nonconformity score.
"""

from dataclasses import dataclass

import numpy as np

import config
from core.exceptions import RankDeficient


@dataclass(frozen=True, eq=False)
class Dataset:
    """
    :param x: Features, shape (count, dims).
    :param y: Responses, shape (count,).
    :param source: Source-domain index of each row, or None for a single domain.
    """
    x: np.ndarray
    y: np.ndarray
    source: np.ndarray = None

    def __len__(self):
        return len(self.y)


@dataclass(frozen=True, eq=False)
class LinearModel:
    w: np.ndarray
    b: float

    def predict(self, x):
        return np.asarray(x, dtype=float) @ self.w + self.b


def make_rng(seed):
    """
    Counter-based generator for a seed (an int or a SeedSequence).
    """
    if not isinstance(seed, np.random.SeedSequence):
        seed = np.random.SeedSequence(seed)
    return np.random.Generator(np.random.Philox(seed))


def gen_gaussian_linear(mu, sigma_x, sigma_y, model, count, rng):
    """
    x ~ N(mu, sigma_x^2 I), y = <w, x> + b + N(0, sigma_y^2).

    :param model: LinearModel holding the oracle (w*, b*).
    :param rng: numpy Generator; the draws are deterministic given its state.
    """
    if count < 1:
        raise ValueError(f"count must be at least 1, got {count}")
    mu = np.asarray(mu, dtype=float)
    x = mu + sigma_x * rng.standard_normal((count, mu.size))
    y = model.predict(x) + sigma_y * rng.standard_normal(count)
    return Dataset(x, y)


def gen_target_mixture(experiment, count, rng):
    """
    Target domain: a source index is drawn from experiment.target_mix, then
    x from that source's marginal; y uses the target noise sigma_ty.
    """
    if count < 1:
        raise ValueError(f"count must be at least 1, got {count}")
    mus = np.asarray(experiment.mu_list, dtype=float)
    source = rng.choice(len(mus), size=count, p=np.asarray(experiment.target_mix, dtype=float))
    x = mus[source] + experiment.sigma_sx * rng.standard_normal((count, mus.shape[1]))
    y = experiment.oracle_model.predict(x) + experiment.sigma_ty * rng.standard_normal(count)
    return Dataset(x, y, source)


def gen_sources(experiment, total, rng):
    """
    Draws `total` source examples split evenly across the source domains
    (earlier domains take the remainder). Returns one Dataset per domain.
    """
    d = len(experiment.mu_list)
    sizes = [total // d + (1 if i < total % d else 0) for i in range(d)]
    return [
        gen_gaussian_linear(mu, experiment.sigma_sx, experiment.sigma_sy,
                            experiment.oracle_model, size, rng)
        for mu, size in zip(experiment.mu_list, sizes)
    ]


def concat(datasets):
    return Dataset(
        np.concatenate([ds.x for ds in datasets]),
        np.concatenate([ds.y for ds in datasets]),
        np.concatenate([np.full(len(ds), i) for i, ds in enumerate(datasets)]),
    )


def fit_ols(dataset):
    """
    Least-squares fit of y on [x, 1].

    :raises RankDeficient: if there are too few rows or the design is singular.
    """
    x = np.asarray(dataset.x, dtype=float)
    count, dims = x.shape
    if count <= dims + 1:
        raise RankDeficient(f"Need more than {dims + 1} training rows, got {count}")
    design = np.column_stack([x, np.ones(count)])
    coef, _, rank, _ = np.linalg.lstsq(design, dataset.y, rcond=None)
    if rank < dims + 1:
        raise RankDeficient(f"Design matrix has rank {rank} < {dims + 1}")
    return LinearModel(coef[:-1], float(coef[-1]))


def abs_residual_score(model, x, y):
    """
    s(x, y) = |<w_hat, x> + b_hat - y|.
    """
    score = np.abs(model.predict(x) - np.asarray(y, dtype=float))
    return float(score) if np.ndim(score) == 0 else score


# Example Usage
if __name__ == '__main__':
    rng = make_rng(config.SIM_SEED)
    oracle = LinearModel(np.ones(config.SIM_DIMS), config.SIM_B_STAR)
    train = gen_gaussian_linear(np.zeros(config.SIM_DIMS), 1.0, 1.0, oracle, 500, rng)
    fitted = fit_ols(train)
    print(f"w_hat = {fitted.w}, b_hat = {fitted.b:.4f}")
