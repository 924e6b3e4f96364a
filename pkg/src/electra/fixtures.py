"""Reference values for the small exact tables, used by tests and by the
CLI ``--check-fixtures`` mode.

Every entry is an exact rational written as ``num/den``; rows not listed
are zero.  These are externally published values, so a mismatch means the
recurrences or the phase engine are wrong, never the fixtures.
"""
from __future__ import annotations

from fractions import Fraction

# peak-count pmf, linear-I boundary rule, rows n = 1..7
PEAK_LINEAR_I = {
    (1, 0): "1",
    (2, 0): "1",
    (3, 0): "2/3",
    (3, 1): "1/3",
    (4, 0): "1/3",
    (4, 1): "2/3",
    (5, 0): "2/15",
    (5, 1): "11/15",
    (5, 2): "2/15",
    (6, 0): "2/45",
    (6, 1): "26/45",
    (6, 2): "17/45",
    (7, 0): "4/315",
    (7, 1): "38/105",
    (7, 2): "4/7",
    (7, 3): "17/315",
}

# peak-count pmf, circular rule, rows n = 1..7
PEAK_CIRCULAR = {
    (1, 1): "1",
    (2, 1): "1",
    (3, 1): "1",
    (4, 1): "2/3",
    (4, 2): "1/3",
    (5, 1): "1/3",
    (5, 2): "2/3",
    (6, 1): "2/15",
    (6, 2): "11/15",
    (6, 3): "2/15",
    (7, 1): "2/45",
    (7, 2): "26/45",
    (7, 3): "17/45",
}

# phase-count law for the linear-I redraw game, standard initialization,
# stop threshold 1; rows n = 0..7
PHASE_LINEAR_I_STANDARD = {
    (0, 0): "1",
    (1, 0): "1",
    (2, 1): "1",
    (3, 1): "1",
    (4, 1): "1",
    (5, 1): "13/15",
    (5, 2): "2/15",
    (6, 1): "28/45",
    (6, 2): "17/45",
    (7, 1): "118/315",
    (7, 2): "197/315",
}

# same game with the alternate initialization (ending with no player
# costs one extra phase); rows n = 0..5
PHASE_LINEAR_I_ALTCOST = {
    (0, 1): "1",
    (1, 0): "1",
    (2, 2): "1",
    (3, 1): "1/3",
    (3, 2): "2/3",
    (4, 1): "2/3",
    (4, 2): "1/3",
    (5, 1): "11/15",
    (5, 2): "2/15",
    (5, 3): "2/15",
}

# phase-count law for the circular redraw game, rows n = 0..7
PHASE_CIRCULAR_STANDARD = {
    (0, 0): "1",
    (1, 0): "1",
    (2, 1): "1",
    (3, 1): "1",
    (4, 1): "2/3",
    (4, 2): "1/3",
    (5, 1): "1/3",
    (5, 2): "2/3",
    (6, 1): "2/15",
    (6, 2): "13/15",
    (7, 1): "2/45",
    (7, 2): "43/45",
}

#: published expected-survivor ratio after two rounds of the persistent-key
#: ring game, (3e^4 - 48e^2 + 233)/384
C2_DECIMAL = 0.1096868681

#: conditional probability of 2 third-round entrants given 4 second-round
#: entrants in an 8-player persistent-key ring
SECOND_ROUND_CONDITIONAL = Fraction(10, 34)


def as_fractions(table: dict[tuple[int, int], str]) -> dict[tuple[int, int], Fraction]:
    return {key: Fraction(value) for key, value in table.items()}
