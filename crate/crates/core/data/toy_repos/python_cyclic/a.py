import c


def from_a():
    return c.from_c() + 1
