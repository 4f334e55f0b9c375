"""Random jointly Gaussian proxy problems shared by the criterion tests."""
import numpy as np

from labelbias.criterion import ProxyProblem
from labelbias.gaussian import GaussianSystem


def random_gaussian_problem(gen: np.random.Generator) -> ProxyProblem:
    k = int(gen.integers(1, 3))
    labels = ("Y", "Yp", *(f"X{i}" for i in range(k)), "Z")
    m = len(labels)
    A = gen.normal(size=(m, m))
    cov = A @ A.T / m + 0.1 * np.eye(m)
    mean = gen.normal(size=m)
    g = GaussianSystem(labels, mean, cov)
    return ProxyProblem(proxy_label="Yp", retained=[f"X{i}" for i in range(k)], candidate="Z", true_label="Y", system=g)
