from math import log10, floor

import numpy as np


def round_sig(x, sig=2):
    """Rounds a number to a given number of significant figures.

    Args:
        x (float): Number to round.
        sig (int, optional): Number of significant figures. Defaults to 2.

    Returns:
        float: Rounded number. Non-finite values are returned unchanged.
    """
    if x and np.isfinite(x):
        return round(x, sig-int(floor(log10(abs(x))))-1)
    elif x:
        return x
    else:
        return 0


def format_sig(x, sig=17):
    """Formats a number with a fixed count of significant digits.

    Args:
        x (float): Number to format.
        sig (int, optional): Number of significant digits. Defaults to 17 (round-trip exact).

    Returns:
        str: Formatted number.
    """
    if isinstance(x, (bool, np.bool_)):
        return str(bool(x))
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return f'{float(x):.{sig}g}'


def chunks(l, n):
    """Split list l into a list of lists of length n.

    Args:
        l (list): Initial list.
        n (int): Desired sublist size.

    Yields:
        list: Subsequent sublists of length n.
    """
    for i in range(0, len(l), n):
        yield l[i:i+n]


def db_to_linear(db):
    """Converts a power ratio in dB to linear scale.

    Args:
        db (float|np.ndarray): Value in dB.

    Returns:
        float|np.ndarray: Linear value.
    """
    return 10.0 ** (np.asarray(db, dtype=float) / 10.0)


def linear_to_db(x):
    """Converts a linear power ratio to dB. Zero maps to -inf.

    Args:
        x (float|np.ndarray): Linear value.

    Returns:
        float|np.ndarray: Value in dB.
    """
    with np.errstate(divide='ignore'):
        return 10.0 * np.log10(np.asarray(x, dtype=float))


def log_grid(lo, hi, points):
    """Log-spaced grid between two positive bounds, endpoints included.

    Args:
        lo (float): Lower bound (> 0).
        hi (float): Upper bound (> lo).
        points (int): Number of points.

    Returns:
        np.ndarray: Grid values.
    """
    return np.logspace(np.log10(lo), np.log10(hi), int(points))
