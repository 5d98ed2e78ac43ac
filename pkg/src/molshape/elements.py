"""Static element property table.

Masses: IUPAC 2013 standard atomic weights, abridged/conventional values
(Meija et al., Pure Appl. Chem. 88, 265 (2016)).
Electronegativities: Pauling scale as tabulated in the CRC Handbook of
Chemistry and Physics, 97th ed., section 9.
Noble gases are absent because they have no Pauling electronegativity.
"""

# symbol: (mass in u, Pauling electronegativity)
ELEMENTS = {
    "H": (1.008, 2.20),
    "Li": (6.94, 0.98),
    "Be": (9.0122, 1.57),
    "B": (10.81, 2.04),
    "C": (12.011, 2.55),
    "N": (14.007, 3.04),
    "O": (15.999, 3.44),
    "F": (18.998, 3.98),
    "Na": (22.990, 0.93),
    "Mg": (24.305, 1.31),
    "Al": (26.982, 1.61),
    "Si": (28.085, 1.90),
    "P": (30.974, 2.19),
    "S": (32.06, 2.58),
    "Cl": (35.45, 3.16),
    "K": (39.098, 0.82),
    "Ca": (40.078, 1.00),
    "Mn": (54.938, 1.55),
    "Fe": (55.845, 1.83),
    "Co": (58.933, 1.88),
    "Ni": (58.693, 1.91),
    "Cu": (63.546, 1.90),
    "Zn": (65.38, 1.65),
    "As": (74.922, 2.18),
    "Se": (78.971, 2.55),
    "Br": (79.904, 2.96),
    "Sn": (118.71, 1.96),
    "I": (126.90, 2.66),
    "Pt": (195.08, 2.28),
    "Hg": (200.59, 2.00),
}


class UnknownElementError(KeyError):
    def __init__(self, symbol):
        super().__init__(symbol)
        self.symbol = symbol

    def __str__(self):
        return f"unknown element symbol {self.symbol!r}"


def canonical_symbol(symbol):
    """'CL' / 'cl' -> 'Cl'."""
    s = symbol.strip()
    return s[:1].upper() + s[1:].lower()


def element_properties(symbol):
    """Return ``(mass, electronegativity)`` for an element symbol."""
    try:
        return ELEMENTS[canonical_symbol(symbol)]
    except KeyError:
        raise UnknownElementError(symbol) from None
