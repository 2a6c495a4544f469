import numpy as np


def driving_arrays(driving):
    """(times, values) of a DrivingFunction as float arrays."""
    return np.asarray(driving.times, dtype=float), np.asarray(driving.values, dtype=float)


def field_array(domain, field):
    """Rows (x, y, value) per vertex, the layout of the field CSV."""
    pos = np.asarray(domain.positions, dtype=complex)
    return np.column_stack([pos.real, pos.imag, np.asarray(field.values, dtype=float)])
