"""Discrete probability measures with uniform weights."""

from dataclasses import dataclass

import numpy as np

from ._validation import check_points


@dataclass(frozen=True)
class EmpiricalMeasure:
    """Uniform probability measure on a finite sorted list of atoms."""

    atoms: np.ndarray

    def __post_init__(self):
        atoms = np.sort(check_points(self.atoms, "atoms"))
        atoms.setflags(write=False)
        object.__setattr__(self, "atoms", atoms)

    @classmethod
    def from_values(cls, values):
        return cls(np.ravel(np.asarray(values, dtype=float)))

    @property
    def size(self):
        return self.atoms.size

    def __len__(self):
        return self.atoms.size

    def abs_moment(self, r):
        return float(np.mean(np.abs(self.atoms) ** r))

    def scaled(self, c):
        return EmpiricalMeasure(self.atoms * c)


def as_measure(mu):
    if isinstance(mu, EmpiricalMeasure):
        return mu
    return EmpiricalMeasure.from_values(mu)
