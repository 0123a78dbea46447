"""
Dense reference computations for meshes of a few hundred nodes.
"""

import numpy as np
import scipy.linalg


def dense_blocks(system):
    return system.k_tot.toarray(), system.m_h.toarray(), system.m_g1.toarray()


def dense_generator(system):
    """
    The 2n x 2n matrix of 𝒜 acting on [u, v].
    """
    stiffness, mass, boundary = dense_blocks(system)
    size = system.size
    generator = np.zeros((2 * size, 2 * size))
    generator[:size, size:] = -np.eye(size)
    generator[size:, :size] = np.linalg.solve(mass, stiffness)
    generator[size:, size:] = system.alpha * np.linalg.solve(mass, boundary)
    return generator


def energy_gram(system):
    stiffness, mass, _ = dense_blocks(system)
    return scipy.linalg.block_diag(stiffness, mass)


def energy_operator_norm(matrix, gram):
    """
    The largest singular value of G^½ T G^-½.
    """
    factor = np.linalg.cholesky(gram).conj().T
    weighted = factor @ matrix @ np.linalg.inv(factor)
    return float(np.linalg.norm(weighted, 2))


def to_vector(state):
    return np.concatenate([state.u, state.v])

