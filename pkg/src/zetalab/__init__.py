"""zetalab: a numerical laboratory for transfer-operator thermodynamics,
zeta-regularized determinants and gluing identities, cyclic-cover free
energies, Gaussian fields on graphs, conical Polyakov anomalies with Renyi
entropies, and reflection-positivity violation witnesses."""

__version__ = "0.1.0"
