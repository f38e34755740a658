"""Reference CD polynomials as transcribed, used only as regression fixtures.

Each polynomial is a function of ``(k, l, r)`` where ``r`` is the radical the
polynomial is written in: ``sqrt(c)`` for gba, ``sqrt(32c/3)`` for gbal and
``sqrt(25c/2)`` for gbalr.  The library computes its CD values from the
Jacobian instead (see :func:`oligopoly.stability.cd_block`); these fixtures
only cross-check signs and scale factors.

``PRINTED_RELATIONS`` is the relation each CD was published with.
``TYPO_RISK`` lists entries whose transcription deserves suspicion.
"""

from fractions import Fraction

RADICAND = {"gba": Fraction(1), "gbal": Fraction(32, 3), "gbalr": Fraction(25, 2)}

# s = k * sqrt(q*c) used by stability.scaled_jacobian, as a multiple of k*r
S_PER_KR = {"gba": Fraction(1), "gbal": Fraction(3, 4), "gbalr": Fraction(2, 5)}


def _gba(k, l, r):
    return (
        k * l * r,
        504 * k * l * r - 1010 * k * r - 909 * l + 1800,
        324 * r**2 * k**2 * l**2 - 18360 * r**2 * k**2 * l + 10100 * r**2 * k**2
        - 16524 * k * l**2 * r - 840420 * k * l * r + 8181 * l**2 + 891000 * k * r
        + 801900 * l - 1620000,
        36 * r**2 * k**2 * l**2 + 1960 * r**2 * k**2 * l + 1764 * k * l**2 * r
        - 1100 * r**2 * k**2 + 93420 * k * l * r - 99000 * k * r - 891 * l**2 - 89100 * l,
    )


def _gbal(k, l, u):
    return (
        k * l * u,
        (512 * k * l - 1017 * k) * u - 3616 * l + 7056,
        (28672 * k**3 * l**3 - 1062432 * k**3 * l**2 + 9180054 * k**3 * l - 12603681 * k**3) * u**3
        + (-3777536 * k**2 * l**3 + 179157888 * k**2 * l**2 - 1194862752 * k**2 * l + 945483840 * k**2) * u**2
        + (116054016 * k * l**3 - 4248400896 * k * l**2 - 5573546496 * k * l + 13237426944 * k) * u
        - 566525952 * l**3 + 11952783360 * l**2 + 47066406912 * l - 133145026560,
        (3616 * k**3 * l**3 - 132966 * k**3 * l**2 - 512973 * k**3 * l + 1226907 * k**3) * u**3
        + (-472768 * k**2 * l**3 + 16419744 * k**2 * l**2 + 77813136 * k**2 * l - 83525904 * k**2) * u**2
        + (-6484992 * k * l**3 + 276668928 * k * l**2 + 1145829888 * k * l - 1868106240 * k) * u
        + 55148544 * l**3 - 1055932416 * l**2 - 6642155520 * l,
        (16 * k * l - 27 * k) * u - 96 * l - 12816,
        (16 * k * l - 27 * k) * u - 96 * l + 13104,
    )


def _gbalr(k, l, v):
    return (
        k * l * v,
        (25 * l - 56) * (5737 * k * v - 50860),
        (3934321875 * k**3 * l**3 - 104905111500 * k**3 * l**2 + 1172129631120 * k**3 * l
         - 1186719653952 * k**3) * v**3
        + (-439562531250 * k**2 * l**3 + 19054516460000 * k**2 * l**2
           - 144796527937600 * k**2 * l + 134072666053760 * k**2) * v**2
        + (19706242500000 * k * l**3 - 579386747450000 * k * l**2
           - 1721529608680000 * k * l + 3133067852544000 * k) * v
        - 113004562500000 * l**3 + 1975821995000000 * l**2 + 12875890524000000 * l
        - 37485773024000000,
        (9423 * k**2 * v**2 - 981050 * k * v - 33575000)
        * ((3375 * k * l**3 - 89180 * k * l**2 - 629552 * k * l + 812224 * k) * v
           - 22500 * l**3 + 343000 * l**2 + 3332000 * l),
        (225 * k * l - 252 * k) * v - 1500 * l - 217840,
        (225 * k * l - 252 * k) * v - 1500 * l + 221200,
    )


POLYNOMIALS = {"gba": _gba, "gbal": _gbal, "gbalr": _gbalr}

PRINTED_RELATIONS = {
    "gba": (">", ">", "<", "<"),
    "gbal": (">", ">", ">", "<", "<", ">"),
    "gbalr": (">", ">", "<", "<", "<", ">"),
}

TYPO_RISK = {
    ("gbal", 3): "published with '> 0' although it is a negative multiple of its corollary inequality",
    ("gbalr", 4): "transcription appears to end abruptly; the product form is nevertheless complete",
}


def evaluate(preset, k, l, r):
    return POLYNOMIALS[preset](k, l, r)


def holds(value, relation):
    return value > 0 if relation == ">" else value < 0
