"""Five-qutrit odd-size reference listing, one block per row.

Symbols: 0 and 2 are basis vectors, eta spans levels {0,1}, xi spans {1,2}.
"""

C_ROWS = [
    ((), "0 0 0 0 0"),
    ((1, 2), "eta xi 2 2 2"),
    ((1, 3), "eta 0 xi 2 2"),
    ((1, 4), "eta 0 0 xi 2"),
    ((1, 5), "eta 0 0 0 xi"),
    ((2, 3), "0 xi eta 0 0"),
    ((2, 4), "0 xi 2 eta 0"),
    ((2, 5), "0 xi 2 2 eta"),
    ((3, 4), "0 0 xi eta 0"),
    ((3, 5), "0 0 xi 2 eta"),
    ((4, 5), "0 0 0 xi eta"),
    ((1, 2, 3, 4), "eta xi eta xi 2"),
    ((1, 2, 3, 5), "eta xi eta 0 xi"),
    ((1, 2, 4, 5), "eta xi 2 eta xi"),
    ((1, 3, 4, 5), "eta 0 xi eta xi"),
    ((2, 3, 4, 5), "0 xi eta xi eta"),
]

D_ROWS = [
    ((), "2 2 2 2 2"),
    ((1, 2), "xi eta 0 0 0"),
    ((1, 3), "xi 2 eta 0 0"),
    ((1, 4), "xi 2 2 eta 0"),
    ((1, 5), "xi 2 2 2 eta"),
    ((2, 3), "2 eta xi 2 2"),
    ((2, 4), "2 eta 0 xi 2"),
    ((2, 5), "2 eta 0 0 xi"),
    ((3, 4), "2 2 eta xi 2"),
    ((3, 5), "2 2 eta 0 xi"),
    ((4, 5), "2 2 2 eta xi"),
    ((1, 2, 3, 4), "xi eta xi eta 0"),
    ((1, 2, 3, 5), "xi eta xi 2 eta"),
    ((1, 2, 4, 5), "xi eta 0 xi eta"),
    ((1, 3, 4, 5), "xi 2 eta xi eta"),
    ((2, 3, 4, 5), "2 eta xi eta xi"),
]

# after dropping party 5 from the blocks that are spread there
STRIPPED_ROWS = [
    ("C", (1,), "eta 0 0 0"),
    ("C", (2,), "0 xi 2 2"),
    ("C", (3,), "0 0 xi 2"),
    ("C", (4,), "0 0 0 xi"),
    ("C", (1, 2, 3), "eta xi eta 0"),
    ("C", (1, 2, 4), "eta xi 2 eta"),
    ("C", (1, 3, 4), "eta 0 xi eta"),
    ("C", (2, 3, 4), "0 xi eta xi"),
    ("D", (1,), "xi 2 2 2"),
    ("D", (2,), "2 eta 0 0"),
    ("D", (3,), "2 2 eta 0"),
    ("D", (4,), "2 2 2 eta"),
    ("D", (1, 2, 3), "xi eta xi 2"),
    ("D", (1, 2, 4), "xi eta 0 xi"),
    ("D", (1, 3, 4), "xi 2 eta xi"),
    ("D", (2, 3, 4), "2 eta xi eta"),
]

SYMBOLS = {"0": "zero", "2": "top", "eta": "alpha", "xi": "beta"}
